from typing import Optional, Tuple

import numpy as np

from tidlab.common.utils.common_utils import signed_power
from tidlab.model.params import Params
from tidlab.time_change.scaling import drift_coefficients
from tidlab.time_change.time_change import TimeChange


class DriftModel:
    """Drift rho a(u) sgn(y)|y|^alpha - b(u) y in the integration variable u

    Without a change of time u is the original time t, a(t) = t^-beta and
    b = 0. With a change of time u is the transformed time s.

    Attributes:
        params (Params): model parameters
        time_change (TimeChange): change of time, None for the original equation
        u_start (float): initial integration time (1, or 0 when time-changed)

    """

    def __init__(self, params: Params, time_change: Optional[TimeChange] = None):
        self.params = params
        self.time_change = time_change
        self.u_start = 1.0 if time_change is None else 0.0

    @property
    def transformed(self) -> bool:
        return self.time_change is not None

    def coefficients(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self.time_change is None:
            u = np.asarray(u, dtype=float)
            return u ** -self.params.beta, np.zeros_like(u)
        return drift_coefficients(self.params, self.time_change, u)

    def __call__(self, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        a, b = self.coefficients(u)
        return self.params.rho * a * signed_power(y, self.params.alpha) - b * y

    def explosion_time(self, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Invert the zero-noise blow-up profile |y|^(1-alpha) = rho (alpha-1) a(u) (tau-u)"""
        p = self.params
        a, _ = self.coefficients(u)
        return u + np.abs(y) ** (1.0 - p.alpha) / (p.rho * (p.alpha - 1.0) * a)

    def to_original(self, u: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Map (u, y) to original (t, x) = (phi(u), y sqrt(phi'(u)))"""
        if self.time_change is None:
            return u, y
        phi, phi_prime, _ = self.time_change.evaluate(u)
        return phi, y * np.sqrt(phi_prime)

    def original_time(self, u: float) -> float:
        if self.time_change is None:
            return float(u)
        if u >= self.time_change.t1:
            return np.inf
        return float(self.time_change.phi(u))
