from dataclasses import asdict, dataclass
from enum import Enum
import math
from typing import Optional


class LawKind(Enum):
    GAUSSIAN = "Gaussian"
    HALF_GAUSSIAN = "HalfGaussian"
    SQRT_GAMMA = "SqrtGamma"
    LAMBDA = "Lambda"
    PI = "Pi"
    POINT_MASS_ZERO = "PointMassZero"
    DETERMINISTIC = "DeterministicLimit"


class Support(Enum):
    R = "R"
    HALF_LINE_POS = "HalfLinePos"


@dataclass(frozen=True)
class LimitLawDescriptor:
    """Serializable description of a limit law

    Only the fields relevant to `kind` are set. SqrtGamma is parameterized by
    the (shape, scale) of the squared variable.

    Attributes:
        kind (LawKind): law family
        mean (float): Gaussian mean
        variance (float): Gaussian variance
        shape (float): Gamma shape of the squared variable
        scale (float): Gamma scale of the squared variable
        rho (float): Lambda/Pi drift strength
        alpha (float): Lambda/Pi space exponent
        ell (float): deterministic limit value

    """

    kind: LawKind
    mean: Optional[float] = None
    variance: Optional[float] = None
    shape: Optional[float] = None
    scale: Optional[float] = None
    rho: Optional[float] = None
    alpha: Optional[float] = None
    ell: Optional[float] = None

    @classmethod
    def gaussian(cls, mean: float, variance: float) -> "LimitLawDescriptor":
        assert variance > 0, "Gaussian variance must be positive"
        return cls(LawKind.GAUSSIAN, mean=float(mean), variance=float(variance))

    @classmethod
    def half_gaussian(cls) -> "LimitLawDescriptor":
        return cls(LawKind.HALF_GAUSSIAN)

    @classmethod
    def sqrt_gamma(cls, shape: float, scale: float) -> "LimitLawDescriptor":
        assert shape > 0 and scale > 0, "Gamma shape and scale must be positive"
        return cls(LawKind.SQRT_GAMMA, shape=float(shape), scale=float(scale))

    @classmethod
    def lambda_law(cls, rho: float, alpha: float) -> "LimitLawDescriptor":
        return cls(LawKind.LAMBDA, rho=float(rho), alpha=float(alpha))

    @classmethod
    def pi_law(cls, rho: float, alpha: float) -> "LimitLawDescriptor":
        return cls(LawKind.PI, rho=float(rho), alpha=float(alpha))

    @classmethod
    def point_mass_zero(cls) -> "LimitLawDescriptor":
        return cls(LawKind.POINT_MASS_ZERO)

    @classmethod
    def deterministic(cls, ell: float) -> "LimitLawDescriptor":
        return cls(LawKind.DETERMINISTIC, ell=float(ell))

    @property
    def support(self) -> Support:
        if self.kind in (LawKind.HALF_GAUSSIAN, LawKind.SQRT_GAMMA):
            return Support.HALF_LINE_POS
        if self.kind in (LawKind.LAMBDA, LawKind.PI) and self.alpha <= -1:
            return Support.HALF_LINE_POS
        return Support.R

    def to_dict(self) -> dict:
        info = {k: v for k, v in asdict(self).items() if v is not None}
        info["kind"] = self.kind.value
        info["support"] = self.support.value
        return info

    def __str__(self) -> str:
        if self.kind == LawKind.GAUSSIAN:
            return f"N({self.mean:.6g}, {self.variance:.6g})"
        if self.kind == LawKind.HALF_GAUSSIAN:
            return "|N(0, 1)|"
        if self.kind == LawKind.SQRT_GAMMA:
            return f"sqrt(Gamma({self.shape:.6g}, {self.scale:.6g}))"
        if self.kind == LawKind.LAMBDA:
            return f"Lambda({self.rho:.6g}, {self.alpha:.6g})"
        if self.kind == LawKind.PI:
            return f"Pi({self.rho:.6g}, {self.alpha:.6g})"
        if self.kind == LawKind.POINT_MASS_ZERO:
            return "delta_0"
        return f"delta_{self.ell:.6g}"


@dataclass(frozen=True)
class Quadrature:
    """Tolerances for adaptive quadrature

    Attributes:
        abs_tol (float): absolute error tolerance
        rel_tol (float): relative error tolerance
        max_subdivisions (int): QUADPACK subinterval limit

    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        assert self.abs_tol > 0 and self.rel_tol > 0, "tolerances must be positive"
        assert self.max_subdivisions >= 1

    def accepts(self, value: float, error: float) -> bool:
        """True when a reported error estimate meets the tolerances (with slack)"""
        return error <= 10.0 * max(self.abs_tol, self.rel_tol * math.fabs(value))
