from dataclasses import dataclass
from enum import Enum
import math
from typing import Optional, Tuple

import numpy as np

from tidlab.common.errors import DegenerateExponent, OutOfDomain
from tidlab.common.utils.common_utils import ArrayLike, compare, is_close

# Evaluation of a power change with gamma > 1 is capped at t1 * (1 - T1_CAP)
T1_CAP = 1e-12


class TimeChangeKind(Enum):
    EXPONENTIAL = "exponential"
    POWER = "power"


@dataclass(frozen=True)
class TimeChange:
    """C^2 change of time phi: [0, t1) -> [1, inf) with phi(0) = 1

    Attributes:
        kind (TimeChangeKind): exponential or power family
        gamma (float): exponent of phi' = phi^gamma (1 for exponential)
        t1 (float): domain endpoint, math.inf unless gamma > 1
        delta (float): gamma / (2 (gamma - 1)) when gamma > 1

    """

    kind: TimeChangeKind
    gamma: float = 1.0
    t1: float = math.inf
    delta: Optional[float] = None

    @property
    def is_exponential(self) -> bool:
        """phi(s) = e^s (exponential change, or power change with gamma = 1)"""
        return self.kind == TimeChangeKind.EXPONENTIAL or is_close(self.gamma, 1.0)

    @property
    def finite_horizon(self) -> bool:
        return math.isfinite(self.t1)

    def _check_domain(self, s: np.ndarray) -> np.ndarray:
        if np.any(s < 0) or np.any(s >= self.t1):
            raise OutOfDomain(f"change of time is defined on [0, {self.t1}), got s = {s}")
        if self.finite_horizon:
            s = np.minimum(s, self.t1 * (1.0 - T1_CAP))
        return s

    def evaluate(self, s: ArrayLike) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
        """Return (phi(s), phi'(s), phi''(s))"""
        s_arr = self._check_domain(np.asarray(s, dtype=float))
        if self.is_exponential:
            phi = np.exp(s_arr)
            derivatives = (phi, phi, phi)
        else:
            phi = self._power_phi(s_arr)
            derivatives = (phi, phi ** self.gamma, self.gamma * phi ** (2.0 * self.gamma - 1.0))
        if np.ndim(s_arr) == 0:
            return tuple(float(d) for d in derivatives)
        return derivatives

    def _power_phi(self, s: np.ndarray) -> np.ndarray:
        if self.finite_horizon:
            # 1 + (1 - gamma) s = (t1 - s) / t1 keeps precision near t1
            return ((self.t1 - s) / self.t1) ** (-self.t1)
        return (1.0 + (1.0 - self.gamma) * s) ** (1.0 / (1.0 - self.gamma))

    def phi(self, s: ArrayLike) -> ArrayLike:
        return self.evaluate(s)[0]

    def phi_prime_at(self, t: ArrayLike) -> ArrayLike:
        """phi' o phi^{-1}(t), computed directly from t"""
        t_arr = np.asarray(t, dtype=float)
        value = t_arr if self.is_exponential else t_arr ** self.gamma
        return float(value) if np.ndim(value) == 0 else value

    def inverse(self, t: ArrayLike) -> ArrayLike:
        """phi^{-1}(t) for t >= 1; t = inf maps to t1"""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 1.0):
            raise OutOfDomain(f"phi^-1 is defined on [1, inf), got t = {t}")
        with np.errstate(over="ignore", divide="ignore"):
            if self.is_exponential:
                s = np.log(t_arr)
            elif self.finite_horizon:
                s = self.t1 * (1.0 - t_arr ** (-1.0 / self.t1))
            else:
                s = (t_arr ** (1.0 - self.gamma) - 1.0) / (1.0 - self.gamma)
        return float(s) if np.ndim(s) == 0 else s


def make_power(alpha: float, beta: float) -> TimeChange:
    """Power change of time phi' = phi^gamma with gamma = 2 beta / (alpha + 1)"""
    if alpha == -1:
        raise DegenerateExponent("the power change of time needs alpha != -1")
    gamma = 2.0 * beta / (alpha + 1.0)
    if compare(gamma, 1.0) > 0:
        return TimeChange(
            TimeChangeKind.POWER,
            gamma=gamma,
            t1=1.0 / (gamma - 1.0),
            delta=gamma / (2.0 * (gamma - 1.0)),
        )
    return TimeChange(TimeChangeKind.POWER, gamma=gamma)


def make_exponential() -> TimeChange:
    """phi(s) = e^s on [0, inf)"""
    return TimeChange(TimeChangeKind.EXPONENTIAL)
