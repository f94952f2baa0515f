from dataclasses import asdict, dataclass
from enum import Enum
import math

from tidlab.common.errors import InvalidParameters


@dataclass(frozen=True)
class Params:
    """Parameters of dX_t = dB_t + rho sgn(X_t)|X_t|^alpha / t^beta dt

    Attributes:
        rho (float): drift strength; negative attracts towards 0, positive repels
        alpha (float): space exponent
        beta (float): time exponent
        x0 (float): initial position, nonnegative
        t0 (float): initial time, always 1

    """

    rho: float
    alpha: float
    beta: float
    x0: float = 0.0
    t0: float = 1.0

    def __post_init__(self):
        for name in ("rho", "alpha", "beta", "x0", "t0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameters(f"{name} must be finite, got {value}")
        if self.t0 != 1.0:
            raise InvalidParameters(f"t0 is normalized to 1, got {self.t0}")
        if self.x0 < 0:
            raise InvalidParameters(f"x0 must be nonnegative, got {self.x0}")

    @property
    def gamma(self) -> float:
        """Exponent 2 beta / (alpha + 1) of the power change of time"""
        if self.alpha == -1:
            raise InvalidParameters("gamma is undefined for alpha = -1")
        return 2.0 * self.beta / (self.alpha + 1.0)

    def to_dict(self) -> dict:
        return asdict(self)


class ValidityClass(Enum):
    ATTRACTIVE_P_MINUS = "AttractiveP_minus"
    REPULSIVE_P_PLUS = "RepulsiveP_plus"
    BROWNIAN_BOUNDARY = "BrownianBoundary"
    INVALID = "Invalid"


def validate(p: Params) -> ValidityClass:
    """Locate the triple inside or outside the studied parameter region.

    Invalid means solutions die at the first hitting time of 0.
    """
    if p.rho == 0:
        return ValidityClass.BROWNIAN_BOUNDARY
    if p.rho > 0:
        return ValidityClass.REPULSIVE_P_PLUS
    if p.alpha > -1:
        return ValidityClass.ATTRACTIVE_P_MINUS
    return ValidityClass.INVALID


def require_valid(p: Params) -> ValidityClass:
    """validate(p), raising InvalidParameters on the Invalid verdict"""
    validity = validate(p)
    if validity == ValidityClass.INVALID:
        raise InvalidParameters(
            f"(rho={p.rho}, alpha={p.alpha}) is outside P: attractive drift with "
            f"alpha <= -1 kills every solution at 0"
        )
    return validity
