from dataclasses import dataclass, replace
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class KilledPath:
    """Discrete trajectory represented on its life interval only

    Attributes:
        t_start (float): first grid time
        times (np.ndarray): strictly increasing time grid, times[0] == t_start
        values (np.ndarray): path values on the grid
        killing_time (float): explosion time, None if the path was not killed

    """

    t_start: float
    times: np.ndarray
    values: np.ndarray
    killing_time: Optional[float] = None

    def __post_init__(self):
        assert len(self.times) == len(self.values), "times and values differ in length"
        assert len(self.times) >= 1, "a path has at least its starting point"
        assert self.times[0] == self.t_start, "times[0] must equal t_start"
        assert np.all(np.diff(self.times) > 0), "time grid must be strictly increasing"
        if self.killing_time is not None:
            assert self.times[-1] <= self.killing_time, "grid extends past the killing time"

    @property
    def killed(self) -> bool:
        return self.killing_time is not None

    @property
    def terminal_time(self) -> float:
        return float(self.times[-1])

    @property
    def terminal_value(self) -> float:
        return float(self.values[-1])

    def __len__(self) -> int:
        return len(self.times)


def reflect_path(path: KilledPath) -> KilledPath:
    """Sign-flipped copy of a path.

    With alpha <= -1 and x0 = 0 the engine only produces the nonnegative
    solution; its mirror image is the other extremal solution.
    """
    return replace(path, values=-np.asarray(path.values))
