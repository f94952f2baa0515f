from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np

from tidlab.model.params import Params
from tidlab.sde.config import SimConfig
from tidlab.sde.drift import DriftModel


class Scheme(ABC):
    """Abstract base class for one-step discretization schemes

    A scheme advances a batch of paths by one step. It may work in its own
    state variable (e.g. the square of the path); `to_state` and `to_value`
    convert between path values and scheme states.

    Attributes:
        params (Params): model parameters
        sim_cfg (SimConfig): discretization settings
        stochastic (bool): false for the zero-noise scheme

    """

    stochastic = True

    def __init__(self, params: Params, sim_cfg: SimConfig):
        self.params = params
        self.sim_cfg = sim_cfg

    def to_state(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def to_value(self, state: np.ndarray) -> np.ndarray:
        return state

    def drift(self, model: DriftModel, u: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Drift used for step control, in path-value coordinates"""
        return model(u, x)

    @abstractmethod
    def step(
        self,
        model: DriftModel,
        u: np.ndarray,
        state: np.ndarray,
        h: np.ndarray,
        z: np.ndarray,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Advance states from u to u + h with standard normals z.

        Returns the new states and a mask of rejected steps, to be retried at
        half the step with fresh normals.
        """
        pass
