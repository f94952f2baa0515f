from typing import Tuple

import numpy as np
from scipy.integrate import solve_ivp

from tidlab.common.abstract.scheme import Scheme
from tidlab.sde.drift import DriftModel


class DirectEM(Scheme):
    """Explicit Euler-Maruyama on the path itself

    For -1 < alpha < 0 the drift is clamped to |drift| <= 1/sqrt(dt) so the
    integrable singularity at 0 cannot produce a jump larger than the noise.
    """

    def step(
        self,
        model: DriftModel,
        u: np.ndarray,
        state: np.ndarray,
        h: np.ndarray,
        z: np.ndarray,
    ) -> Tuple[np.ndarray, np.ndarray]:
        drift = model(u, state)
        if self.params.alpha < 0:
            cap = self.sim_cfg.clamp_cap
            drift = np.clip(drift, -cap, cap)
        new_state = state + drift * h + np.sqrt(h) * z
        return new_state, np.zeros(len(state), dtype=bool)


class SquaredProcess(Scheme):
    """Euler-Maruyama on R = X^2 for alpha = -1, with full truncation

    dR = 2 sqrt(R) dW + (2 rho a(u) + 1 - 2 b(u) R) du, and X = sqrt(R).
    """

    def to_state(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) ** 2

    def to_value(self, state: np.ndarray) -> np.ndarray:
        return np.sqrt(np.maximum(state, 0.0))

    def drift(self, model: DriftModel, u: np.ndarray, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(x)

    def step(
        self,
        model: DriftModel,
        u: np.ndarray,
        state: np.ndarray,
        h: np.ndarray,
        z: np.ndarray,
    ) -> Tuple[np.ndarray, np.ndarray]:
        a, b = model.coefficients(u)
        positive = np.maximum(state, 0.0)
        new_state = (
            state
            + 2.0 * np.sqrt(positive) * np.sqrt(h) * z
            + (2.0 * self.params.rho * a + 1.0 - 2.0 * b * positive) * h
        )
        return np.maximum(new_state, 0.0), np.zeros(len(state), dtype=bool)


class PositivityPreserving(Scheme):
    """Split step for alpha < -1: exact repelling sub-step, then the noise

    The deterministic part x' = rho a x^alpha is solved exactly over the step,
    x <- (x^(1-alpha) + (1-alpha) rho a h)^(1/(1-alpha)); steps landing at or
    below 0 are rejected.
    """

    def step(
        self,
        model: DriftModel,
        u: np.ndarray,
        state: np.ndarray,
        h: np.ndarray,
        z: np.ndarray,
    ) -> Tuple[np.ndarray, np.ndarray]:
        a, b = model.coefficients(u)
        k = 1.0 - self.params.alpha
        pushed = (np.maximum(state, 0.0) ** k + k * self.params.rho * a * h) ** (1.0 / k)
        new_state = pushed - b * pushed * h + np.sqrt(h) * z
        return new_state, new_state <= 0.0


class ZeroNoiseODE(Scheme):
    """Noise switched off: the path solves x' = drift(u, x)

    In batches the step is a plain Euler step. Single paths go through
    `solve`, an adaptive Runge-Kutta integration stopped at the explosion
    threshold.
    """

    stochastic = False

    def step(
        self,
        model: DriftModel,
        u: np.ndarray,
        state: np.ndarray,
        h: np.ndarray,
        z: np.ndarray,
    ) -> Tuple[np.ndarray, np.ndarray]:
        return state + model(u, state) * h, np.zeros(len(state), dtype=bool)

    def solve(
        self, model: DriftModel, x0: float, u_end: float
    ) -> Tuple[np.ndarray, np.ndarray, bool]:
        """Integrate from (model.u_start, x0) to u_end.

        Returns grid times, values, and whether the threshold was crossed.
        """
        threshold = self.sim_cfg.explosion_threshold

        def fun(u, y):
            return model(u, y)

        def crossing(u, y):
            return abs(y[0]) - threshold

        crossing.terminal = True
        crossing.direction = 1

        sol = solve_ivp(
            fun,
            (model.u_start, u_end),
            [x0],
            method="RK45",
            rtol=1e-11,
            atol=1e-12,
            events=crossing,
            max_step=self.sim_cfg.dt * 100,
        )
        # step size underflow right before the singularity counts as a crossing
        stalled = sol.status == -1 and abs(sol.y[0][-1]) > max(abs(x0), 1.0) * 1e3
        crossed = sol.status == 1 or stalled
        return sol.t, sol.y[0], crossed
