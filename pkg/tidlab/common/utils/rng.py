from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Normals buffered per path between generator calls
CHUNK_SIZE = 1024


@dataclass(frozen=True)
class RngStreamSpec:
    """Address of one per-path random stream

    Attributes:
        master_seed (int): 64-bit experiment seed
        path_index (int): index of the path inside the experiment

    """

    master_seed: int
    path_index: int = 0

    def __post_init__(self):
        assert self.path_index >= 0, "path_index must be nonnegative"

    def generator(self) -> np.random.Generator:
        """Counter-based generator derived statelessly from (master_seed, path_index)"""
        seed_seq = np.random.SeedSequence(
            int(self.master_seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(self.path_index),)
        )
        return np.random.Generator(np.random.Philox(seed_seq))


class NormalStreams:
    """Standard normal draws for a batch of paths, each from its own stream

    A path consumes its stream strictly in order, so the numbers it sees do not
    depend on which other paths share the batch.

    Attributes:
        path_indices (np.ndarray): path index of every batch row
        generators (list): one generator per row
        _buffer (np.ndarray): (rows, chunk) buffered normals
        _cursor (np.ndarray): next unread column per row

    """

    def __init__(
        self, master_seed: int, path_indices: Sequence[int], chunk_size: int = CHUNK_SIZE
    ):
        self.path_indices = np.asarray(path_indices, dtype=np.int64)
        self.chunk_size = chunk_size
        self.generators = [
            RngStreamSpec(master_seed, int(i)).generator() for i in self.path_indices
        ]
        self._buffer = np.empty((len(self.generators), chunk_size))
        self._cursor = np.full(len(self.generators), chunk_size, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.generators)

    def draw(self, rows: np.ndarray) -> np.ndarray:
        """Return one standard normal for each row in rows (distinct row indices)"""
        rows = np.asarray(rows, dtype=np.int64)
        exhausted = rows[self._cursor[rows] >= self.chunk_size]
        for row in exhausted:
            self._buffer[row] = self.generators[row].standard_normal(self.chunk_size)
            self._cursor[row] = 0
        values = self._buffer[rows, self._cursor[rows]]
        self._cursor[rows] += 1
        return values
