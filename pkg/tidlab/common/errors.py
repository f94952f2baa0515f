class TidlabError(Exception):
    """Base class for every error raised by tidlab"""


class InvalidParameters(TidlabError, ValueError):
    """Parameter triple outside the studied region, or a precondition on it fails"""


class SingularPoint(TidlabError, ValueError):
    """Drift or potential evaluated at the singular point x = 0"""


class DomainError(TidlabError, ValueError):
    """Function evaluated where its logarithms are not positive"""


class DegenerateExponent(TidlabError, ValueError):
    """Power change of time requested with alpha = -1"""


class OutOfDomain(TidlabError, ValueError):
    """Change of time evaluated outside [0, t1)"""


class NonConvergentStep(TidlabError):
    """Step refinement reached its floor without resolving the path"""


class NonIntegrable(TidlabError, ValueError):
    """Density or integrand is not integrable for the given parameters"""


class ToleranceNotMet(TidlabError):
    """Quadrature error estimate exceeds the requested tolerances"""


class NoLimitLaw(TidlabError):
    """Regime has no limit law (explosive almost surely)"""


class EmptySample(TidlabError, ValueError):
    """Statistic requested on an empty sample"""


class ConfigError(TidlabError, ValueError):
    """Experiment configuration is inconsistent"""


class HeavyTailWarning(RuntimeWarning):
    """Monte Carlo weights are heavy-tailed; normal-approximation CI is unreliable"""


class DiagnosticWarning(RuntimeWarning):
    """Finite-horizon diagnostic fell outside its smoke bound"""
