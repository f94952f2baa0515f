from dataclasses import dataclass
from enum import Enum
from typing import Optional


class SchemeKind(Enum):
    AUTO = "Auto"
    DIRECT_EM = "DirectEM"
    SQUARED_PROCESS = "SquaredProcess"
    POSITIVITY_PRESERVING = "PositivityPreserving"
    ZERO_NOISE_ODE = "ZeroNoiseODE"


@dataclass(frozen=True)
class SimConfig:
    """Discretization settings shared by every scheme

    Attributes:
        dt (float): base step
        adapt (bool): refine steps geometrically where the drift is stiff
        explosion_threshold (float): |X| level that counts as explosion
        blowup_refine_floor (float): smallest refined step, dt * 1e-6 if None
        scheme (SchemeKind): discretization scheme, Auto picks by alpha
        seed (int): 64-bit master seed
        store_full_path (bool): keep the whole trajectory, not only its end
        rel_step (float): bound on |drift| * h / max(|x|, 1) under refinement
        record_every (int): keep one grid point in record_every when storing
        max_floor_steps (int): consecutive floor steps before giving up
        max_halvings (int): step halvings allowed by positivity retries

    """

    dt: float = 1e-3
    adapt: bool = True
    explosion_threshold: float = 1e8
    blowup_refine_floor: Optional[float] = None
    scheme: SchemeKind = SchemeKind.AUTO
    seed: int = 0
    store_full_path: bool = False
    rel_step: float = 0.05
    record_every: int = 1
    max_floor_steps: int = 100000
    max_halvings: int = 30

    def __post_init__(self):
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", SchemeKind(self.scheme))
        assert self.dt > 0, "dt must be positive"
        assert self.explosion_threshold > 0, "explosion_threshold must be positive"
        assert self.rel_step > 0
        assert self.record_every >= 1
        assert self.max_floor_steps >= 1 and self.max_halvings >= 0
        if self.blowup_refine_floor is not None:
            assert 0 < self.blowup_refine_floor <= self.dt, "refine floor must lie in (0, dt]"

    @property
    def refine_floor(self) -> float:
        if self.blowup_refine_floor is None:
            return self.dt * 1e-6
        return self.blowup_refine_floor

    @property
    def clamp_cap(self) -> float:
        """Bound on |drift| for -1 < alpha < 0"""
        return self.dt ** -0.5


@dataclass(frozen=True)
class ExplosionReport:
    """Outcome of one simulated path with respect to explosion

    Attributes:
        exploded (bool): |X| crossed the explosion threshold
        tau_e_estimate (float): explosion time from blow-up profile inversion
        last_value (float): last recorded value
        censored_at (float): horizon of the simulation
        threshold_crossing_time (float): grid time of the threshold crossing
        nonconvergent (bool): step refinement gave up, the path is censored

    """

    exploded: bool
    tau_e_estimate: Optional[float]
    last_value: float
    censored_at: float
    threshold_crossing_time: Optional[float] = None
    nonconvergent: bool = False

    def __post_init__(self):
        if self.exploded:
            assert self.tau_e_estimate is not None, "an exploded path carries tau_e"
        else:
            assert self.tau_e_estimate is None, "tau_e is reported only on explosion"
