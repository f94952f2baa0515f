"""Densities, distribution functions and samplers of the limit laws.

Lambda(rho, alpha) has density proportional to
exp(2 rho |x|^(alpha+1) / (alpha+1)) exp(-x^2 / 2) and Pi(rho, alpha) to
exp(2 rho |x|^(alpha+1) / (alpha+1)), both on R when alpha > -1 and on
(0, inf) otherwise. At alpha = -1 the weight is |x|^(2 rho).
"""
from functools import lru_cache
import math
from typing import Tuple

import numpy as np
from scipy import integrate, special, stats
from scipy.interpolate import PchipInterpolator

from tidlab.common.errors import DomainError, NonIntegrable, ToleranceNotMet
from tidlab.common.utils.common_utils import ArrayLike, is_close
from tidlab.common.utils.rng import RngStreamSpec
from tidlab.laws.descriptor import LawKind, LimitLawDescriptor, Quadrature, Support

# Number of knots of the inverse-CDF tables
TABLE_KNOTS = 2 ** 12

# Tables stop where the log-density is this far below its maximum
TAIL_LOG_DROP = 40.0

# The tail search widens by this factor, up to TAIL_SEARCH_LIMIT
TAIL_SEARCH_FACTOR = 1e6
TAIL_SEARCH_LIMIT = 1e150

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def check_integrable(rho: float, alpha: float, kind: LawKind):
    """Raise NonIntegrable outside the region where the weight integrates"""
    if kind == LawKind.LAMBDA:
        if alpha < 1 and not is_close(alpha, 1.0):
            ok = alpha > -1 or rho >= 0
        elif is_close(alpha, 1.0):
            ok = rho < 0.5
        else:
            ok = rho <= 0
    elif kind == LawKind.PI:
        ok = rho < 0 and alpha > -1
    else:
        raise ValueError(f"normalizers exist for Lambda and Pi only, got {kind}")
    if not ok:
        raise NonIntegrable(f"{kind.value}({rho}, {alpha}) is not integrable")


def log_weight(rho: float, alpha: float, kind: LawKind, x: ArrayLike) -> np.ndarray:
    """Unnormalized log-density on the support (x != 0 when alpha <= -1)"""
    abs_x = np.abs(np.asarray(x, dtype=float))
    with np.errstate(divide="ignore"):
        if alpha == -1:
            value = 2.0 * rho * np.log(abs_x) if rho != 0 else np.zeros_like(abs_x)
        else:
            value = 2.0 * rho * abs_x ** (alpha + 1.0) / (alpha + 1.0)
    if kind == LawKind.LAMBDA:
        value = value - abs_x ** 2 / 2.0
    return value


def _half_line(alpha: float) -> bool:
    return alpha <= -1


@lru_cache(maxsize=256)
def _log_scale(rho: float, alpha: float, kind: LawKind) -> Tuple[float, float]:
    """(maximum of the log-weight, x beyond which it is TAIL_LOG_DROP lower)

    The search range grows by TAIL_SEARCH_FACTOR until the drop is found.
    """
    x_hi = TAIL_SEARCH_FACTOR
    while True:
        grid = np.concatenate([np.linspace(1e-6, 1.0, 200), np.geomspace(1.0, x_hi, 600)])
        with np.errstate(over="ignore", invalid="ignore"):
            log_w = log_weight(rho, alpha, kind, grid)
        shift = float(np.max(log_w))
        peak = grid[np.argmax(log_w)]
        beyond = np.flatnonzero((log_w < shift - TAIL_LOG_DROP) & (grid > peak))
        if beyond.size:
            return shift, float(grid[beyond[0]])
        if x_hi >= TAIL_SEARCH_LIMIT:
            raise ToleranceNotMet(
                f"{kind.value}({rho}, {alpha}) keeps its mass beyond {TAIL_SEARCH_LIMIT:.0e}"
            )
        x_hi *= TAIL_SEARCH_FACTOR


def _shifted_weight(rho: float, alpha: float, kind: LawKind):
    shift, _ = _log_scale(rho, alpha, kind)

    def weight(x: float) -> float:
        if x == 0:
            return 0.0 if _half_line(alpha) else math.exp(-shift)
        return math.exp(float(log_weight(rho, alpha, kind, x)) - shift)

    return weight


def _pi_half_mass(rho: float, alpha: float) -> float:
    """Closed form of the shifted Pi weight over (0, inf)

    With k = alpha + 1 and c = -2 rho / k the integral of exp(-c x^k) is
    Gamma(1/k) / (k c^(1/k)).
    """
    k = alpha + 1.0
    c = -2.0 * rho / k
    shift, _ = _log_scale(rho, alpha, LawKind.PI)
    log_mass = special.gammaln(1.0 / k) - math.log(k) - math.log(c) / k
    return math.exp(log_mass - shift)


@lru_cache(maxsize=256)
def _half_mass(
    rho: float, alpha: float, kind: LawKind, abs_tol: float, rel_tol: float, limit: int
) -> Tuple[float, float]:
    """Shifted integral of the weight over (0, inf), with its error estimate"""
    if kind == LawKind.PI:
        return _pi_half_mass(rho, alpha), 0.0
    weight = _shifted_weight(rho, alpha, kind)
    head, head_err = integrate.quad(weight, 0.0, 1.0, epsabs=abs_tol, epsrel=rel_tol, limit=limit)
    tail, tail_err = integrate.quad(
        weight, 1.0, math.inf, epsabs=abs_tol, epsrel=rel_tol, limit=limit
    )
    return head + tail, head_err + tail_err


def _checked_half_mass(rho: float, alpha: float, kind: LawKind, q: Quadrature) -> float:
    check_integrable(rho, alpha, kind)
    value, error = _half_mass(rho, alpha, kind, q.abs_tol, q.rel_tol, q.max_subdivisions)
    if not q.accepts(value, error):
        raise ToleranceNotMet(f"normalizer error {error:.3g} exceeds tolerance")
    return value


def normalizer(rho: float, alpha: float, kind: LawKind, q: Quadrature = Quadrature()) -> float:
    """Normalizing constant of Lambda(rho, alpha) or Pi(rho, alpha)"""
    half = _checked_half_mass(rho, alpha, kind, q)
    shift, _ = _log_scale(rho, alpha, kind)
    factor = 1.0 if _half_line(alpha) else 2.0
    return factor * half * math.exp(shift)


def density(law: LimitLawDescriptor, x: ArrayLike, q: Quadrature = Quadrature()) -> ArrayLike:
    """Probability density of an absolutely continuous limit law"""
    x_arr = np.asarray(x, dtype=float)
    positive = x_arr > 0
    if law.kind == LawKind.GAUSSIAN:
        value = stats.norm.pdf(x_arr, loc=law.mean, scale=math.sqrt(law.variance))
    elif law.kind == LawKind.HALF_GAUSSIAN:
        value = np.where(positive, 2.0 * stats.norm.pdf(x_arr), 0.0)
    elif law.kind == LawKind.SQRT_GAMMA:
        squared = stats.gamma.pdf(x_arr ** 2, a=law.shape, scale=law.scale)
        value = np.where(positive, 2.0 * np.abs(x_arr) * squared, 0.0)
    elif law.kind in (LawKind.LAMBDA, LawKind.PI):
        z = normalizer(law.rho, law.alpha, law.kind, q)
        with np.errstate(divide="ignore", over="ignore"):
            value = np.exp(log_weight(law.rho, law.alpha, law.kind, x_arr)) / z
        if law.support == Support.HALF_LINE_POS:
            value = np.where(positive, value, 0.0)
    else:
        raise DomainError(f"{law.kind.value} has no density")
    return float(value) if np.ndim(value) == 0 else value


def _weight_cdf(law: LimitLawDescriptor, x: np.ndarray, q: Quadrature) -> np.ndarray:
    """CDF of Lambda/Pi by quadrature over successive sorted points"""
    half = _checked_half_mass(law.rho, law.alpha, law.kind, q)
    weight = _shifted_weight(law.rho, law.alpha, law.kind)
    abs_x = np.abs(x)
    order = np.argsort(abs_x)
    partial = np.empty(len(x))
    running, previous = 0.0, 0.0
    for i in order:
        if abs_x[i] > previous:
            piece, _ = integrate.quad(
                weight,
                previous,
                abs_x[i],
                epsabs=q.abs_tol * 1e-2,
                epsrel=q.rel_tol,
                limit=q.max_subdivisions,
            )
            running += piece
            previous = abs_x[i]
        partial[i] = min(running / half, 1.0)

    if law.support == Support.HALF_LINE_POS:
        return np.where(x > 0, partial, 0.0)
    return 0.5 + 0.5 * np.sign(x) * partial


def law_cdf(law: LimitLawDescriptor, x: ArrayLike, q: Quadrature = Quadrature()) -> ArrayLike:
    """Cumulative distribution function; accepts scalar or array x"""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if law.kind == LawKind.GAUSSIAN:
        value = stats.norm.cdf(x_arr, loc=law.mean, scale=math.sqrt(law.variance))
    elif law.kind == LawKind.HALF_GAUSSIAN:
        value = np.maximum(2.0 * stats.norm.cdf(x_arr) - 1.0, 0.0)
    elif law.kind == LawKind.SQRT_GAMMA:
        value = np.where(x_arr > 0, special.gammainc(law.shape, x_arr ** 2 / law.scale), 0.0)
    elif law.kind == LawKind.POINT_MASS_ZERO:
        value = np.where(x_arr >= 0, 1.0, 0.0)
    elif law.kind == LawKind.DETERMINISTIC:
        value = np.where(x_arr >= law.ell, 1.0, 0.0)
    else:
        value = _weight_cdf(law, x_arr, q)
    return float(value[0]) if np.ndim(x) == 0 else value


class CdfTable:
    """Monotone table of the CDF of |X| for Lambda/Pi, for inverse-CDF sampling

    Knots are uniform near the origin and geometric in the tail, up to the
    point where the log-density has dropped by TAIL_LOG_DROP.

    Attributes:
        law (LimitLawDescriptor): tabulated law
        knots (np.ndarray): abscissae in [0, x_max]
        cumulative (np.ndarray): P(|X| <= knot), from 0 to 1

    """

    def __init__(
        self, law: LimitLawDescriptor, q: Quadrature = Quadrature(), n_knots: int = TABLE_KNOTS
    ):
        assert law.kind in (LawKind.LAMBDA, LawKind.PI), "tables are built for Lambda and Pi"
        self.law = law
        half = _checked_half_mass(law.rho, law.alpha, law.kind, q)
        _, x_max = _log_scale(law.rho, law.alpha, law.kind)
        x_lin = min(1.0, x_max / 8.0)
        n_lin = n_knots // 4
        self.knots = np.unique(
            np.concatenate(
                [np.linspace(0.0, x_lin, n_lin), np.geomspace(x_lin, x_max, n_knots - n_lin + 1)]
            )
        )

        left, right = self.knots[:-1], self.knots[1:]
        mid, half_width = (left + right) / 2.0, (right - left) / 2.0
        nodes = mid[:, None] + half_width[:, None] * _GL_NODES[None, :]
        shift, _ = _log_scale(law.rho, law.alpha, law.kind)
        with np.errstate(divide="ignore", over="ignore"):
            values = np.exp(log_weight(law.rho, law.alpha, law.kind, nodes) - shift)
        pieces = half_width * (values @ _GL_WEIGHTS)
        cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
        total = cumulative[-1]
        if abs(total - half) > 1e-6 * half:
            raise ToleranceNotMet(f"CDF table mass {total:.12g} differs from {half:.12g}")
        self.cumulative = cumulative / total

        increasing = np.concatenate([[True], np.diff(self.cumulative) > 0])
        self._inverse = PchipInterpolator(self.cumulative[increasing], self.knots[increasing])

    def sample_abs(self, uniforms: np.ndarray) -> np.ndarray:
        """|X| for uniforms in [0, 1]"""
        return np.maximum(self._inverse(np.clip(uniforms, 0.0, 1.0)), 0.0)

    def sample(self, uniforms: np.ndarray) -> np.ndarray:
        if self.law.support == Support.HALF_LINE_POS:
            return self.sample_abs(uniforms)
        signs = np.where(uniforms < 0.5, -1.0, 1.0)
        return signs * self.sample_abs(np.abs(2.0 * uniforms - 1.0))


@lru_cache(maxsize=64)
def cdf_table(law: LimitLawDescriptor) -> CdfTable:
    return CdfTable(law)


def law_sample(law: LimitLawDescriptor, rng: RngStreamSpec, n: int) -> np.ndarray:
    """n draws from the law, deterministic given the stream"""
    assert n >= 1, "n must be positive"
    gen = rng.generator()
    if law.kind == LawKind.GAUSSIAN:
        return law.mean + math.sqrt(law.variance) * gen.standard_normal(n)
    if law.kind == LawKind.HALF_GAUSSIAN:
        return np.abs(gen.standard_normal(n))
    if law.kind == LawKind.SQRT_GAMMA:
        return np.sqrt(gen.gamma(law.shape, law.scale, n))
    if law.kind == LawKind.POINT_MASS_ZERO:
        return np.zeros(n)
    if law.kind == LawKind.DETERMINISTIC:
        return np.full(n, law.ell)
    return cdf_table(law).sample(gen.random(n))
