import math
from typing import Tuple

from scipy import integrate

from tidlab.common.errors import InvalidParameters, NonIntegrable, ToleranceNotMet
from tidlab.common.utils.common_utils import compare, is_close
from tidlab.laws.descriptor import Quadrature
from tidlab.model.params import Params


def transient_rate(p: Params) -> Tuple[float, float]:
    """Deterministic rate of the repulsive sub-linear transient regime.

    Returns (ell, nu) with |X_t| / t^nu -> ell almost surely.
    """
    if not (p.rho > 0 and p.alpha < 1 and compare(2.0 * p.beta, p.alpha + 1.0) <= 0):
        raise InvalidParameters("transient_rate needs rho > 0, alpha < 1, 2 beta <= alpha + 1")
    nu = (1.0 - p.beta) / (1.0 - p.alpha)
    ell = (p.rho * (1.0 - p.alpha) / (1.0 - p.beta)) ** (1.0 / (1.0 - p.alpha))
    return ell, nu


def linear_case_params(p: Params, q: Quadrature = Quadrature()) -> Tuple[float, float]:
    """Mean and variance of the Gaussian limit of X_t exp(-rho t^(1-beta) / (1-beta))"""
    if not (is_close(p.alpha, 1.0) and p.rho > 0 and p.beta < 1):
        raise NonIntegrable("linear_case_params needs alpha = 1, rho > 0, beta < 1")
    m = p.x0 * math.exp(p.rho / (p.beta - 1.0))
    exponent = 1.0 - p.beta

    def integrand(s: float) -> float:
        return math.exp(-2.0 * p.rho * s ** exponent / exponent)

    sigma2, error = integrate.quad(
        integrand, 1.0, math.inf, epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions
    )
    if not q.accepts(sigma2, error):
        raise ToleranceNotMet(f"sigma^2 quadrature error {error:.3g} exceeds tolerance")
    return m, sigma2


def bessel_log_rate(p: Params) -> float:
    """liminf of ln(X_t / sqrt t) / ln ln t for the transient Bessel-type case"""
    if not (is_close(p.alpha, -1.0) and p.rho > 0.5):
        raise InvalidParameters("bessel_log_rate needs alpha = -1 and rho > 1/2")
    return -1.0 / (2.0 * p.rho - 1.0)
