from dataclasses import dataclass, field
from enum import Enum
import os
from typing import List, Optional, Tuple

import numpy as np
import ray

from tidlab.common.errors import TidlabError
from tidlab.laws.packages import limit_package
from tidlab.laws.rates import transient_rate
from tidlab.model.envelope import EnvelopeSpec, envelope_floor, envelope_value
from tidlab.model.params import Params
from tidlab.model.regime import NormalizationSpec, classify
from tidlab.sde.bridge import bridge_weights, check_bridge_region
from tidlab.sde.config import SimConfig
from tidlab.sde.engine import make_integrator
from tidlab.sde.integrator import BatchResult
from tidlab.time_change.time_change import TimeChange, make_exponential, make_power

# Paths simulated together in one vectorized batch
BLOCK_SIZE = 2048


class Functional(Enum):
    TERMINAL_NORMALIZED = "TerminalNormalized"
    TERMINAL_RAW = "TerminalRaw"
    EXPLOSION_INDICATOR = "ExplosionIndicator"
    GIRSANOV_WEIGHT = "GirsanovWeight"
    RATE_RATIO = "RateRatio"
    ENVELOPE_SUP = "EnvelopeSup"
    EXPLOSION_TIME = "ExplosionTime"


def named_time_change(name: Optional[str], p: Params) -> Optional[TimeChange]:
    """TimeChange for "power" or "exponential", None for None"""
    if name == "power":
        return make_power(p.alpha, p.beta)
    if name == "exponential":
        return make_exponential()
    assert name is None, f"unknown change of time {name!r}"
    return None


@dataclass(frozen=True)
class EnsembleSpec:
    """Monte Carlo ensemble of independent paths reduced by one functional

    Attributes:
        params (Params): model parameters
        sim_cfg (SimConfig): discretization settings, seed included
        n_paths (int): number of paths
        horizon (float): final original time T
        functional (Functional): per-path statistic
        time_change (str): None, "power" or "exponential"; simulate in transformed time
        normalization (NormalizationSpec): n(t) override for TerminalNormalized
        envelope (EnvelopeSpec): envelope for EnvelopeSup
        window_start (float): EnvelopeSup window is [window_start * T, T]
        eps_cut (float): bridge tail cut for GirsanovWeight, default t1 * 1e-4

    """

    params: Params
    sim_cfg: SimConfig
    n_paths: int
    horizon: float
    functional: Functional = Functional.TERMINAL_NORMALIZED
    time_change: Optional[str] = None
    normalization: Optional[NormalizationSpec] = None
    envelope: Optional[EnvelopeSpec] = None
    window_start: float = 0.5
    eps_cut: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.functional, str):
            object.__setattr__(self, "functional", Functional(self.functional))
        assert self.n_paths >= 1, "n_paths must be positive"
        assert self.horizon > 1, "horizon must exceed 1"
        assert self.time_change in (None, "power", "exponential"), "unknown change of time"
        if self.functional == Functional.GIRSANOV_WEIGHT:
            check_bridge_region(self.params)
        if self.functional == Functional.ENVELOPE_SUP:
            assert self.envelope is not None, "EnvelopeSup needs an envelope"

    def build_time_change(self) -> Optional[TimeChange]:
        return named_time_change(self.time_change, self.params)


@dataclass
class EnsembleResult:
    """Samples of an ensemble, ordered by path index

    Attributes:
        samples (np.ndarray): functional values of the contributing paths
        path_indices (np.ndarray): path index of every sample
        n_survivors (int): paths that neither exploded nor failed
        n_exploded (int): paths that crossed the explosion threshold
        failed (list): (path_index, message) of paths the engine could not finish

    """

    samples: np.ndarray
    path_indices: np.ndarray
    n_survivors: int
    n_exploded: int
    failed: List[Tuple[int, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)


class EnvelopeSupObserver:
    """Running sup of |X_t| / envelope(t) over t in [t_low, T]"""

    def __init__(self, n_rows: int, params: Params, envelope: EnvelopeSpec, t_low: float):
        self.params = params
        self.envelope = envelope
        self.t_low = max(t_low, np.nextafter(envelope_floor(envelope), np.inf))
        self.sup = np.zeros(n_rows)

    def update(self, rows: np.ndarray, t: np.ndarray, x: np.ndarray):
        inside = np.asarray(t) >= self.t_low
        if not inside.any():
            return
        ratio = np.abs(x[inside]) / envelope_value(self.envelope, self.params, t[inside])
        hit = rows[inside]
        self.sup[hit] = np.maximum(self.sup[hit], ratio)


class EnsembleWorker:
    """Runs contiguous blocks of path indices of one ensemble

    Attributes:
        spec (EnsembleSpec): ensemble being computed
        time_change (TimeChange): change of time, None for original time
        u_end (float): horizon in integration time
        normalization (NormalizationSpec): n(t) for TerminalNormalized
        rate_exponent (float): nu for RateRatio

    """

    def __init__(self, spec: EnsembleSpec):
        self.spec = spec
        self.time_change = spec.build_time_change()
        self.u_end = spec.horizon
        if self.time_change is not None:
            self.u_end = float(self.time_change.inverse(spec.horizon))

        self.normalization = spec.normalization
        if spec.functional == Functional.TERMINAL_NORMALIZED and self.normalization is None:
            self.normalization, _ = limit_package(classify(spec.params), spec.params)
        self.rate_exponent = None
        if spec.functional == Functional.RATE_RATIO:
            _, self.rate_exponent = transient_rate(spec.params)

    def run_block(self, path_indices: np.ndarray) -> dict:
        """Per-path raw outcome of one block, keyed like the block"""
        path_indices = np.asarray(path_indices, dtype=np.int64)
        if self.spec.functional == Functional.GIRSANOV_WEIGHT:
            weights = bridge_weights(
                self.spec.params, self.spec.sim_cfg, self.spec.eps_cut, path_indices
            )
            ok = np.ones(len(path_indices), dtype=bool)
            return dict(
                path_indices=path_indices,
                values=weights,
                exploded=np.zeros(len(path_indices), dtype=bool),
                ok=ok,
                failed=[],
            )
        try:
            return self._reduce(path_indices, *self._simulate(path_indices))
        except TidlabError:
            return self._run_one_by_one(path_indices)

    def _simulate(self, path_indices: np.ndarray) -> Tuple[BatchResult, Optional[np.ndarray]]:
        integrator = make_integrator(self.spec.params, self.spec.sim_cfg, self.time_change)
        observers = []
        if self.spec.functional == Functional.ENVELOPE_SUP:
            observers.append(
                EnvelopeSupObserver(
                    len(path_indices),
                    self.spec.params,
                    self.spec.envelope,
                    self.spec.window_start * self.spec.horizon,
                )
            )
        result = integrator.run(path_indices, self.u_end, observers)
        sup = observers[0].sup if observers else None
        return result, sup

    def _reduce(
        self, path_indices: np.ndarray, result: BatchResult, sup: Optional[np.ndarray]
    ) -> dict:
        spec = self.spec
        functional = spec.functional
        exploded = result.exploded
        ok = ~result.nonconvergent
        x_end = result.terminal_value
        horizon = spec.horizon

        if functional == Functional.TERMINAL_NORMALIZED:
            values = x_end / self.normalization(horizon)
        elif functional == Functional.TERMINAL_RAW:
            values = x_end.copy()
        elif functional == Functional.EXPLOSION_INDICATOR:
            values = exploded.astype(float)
        elif functional == Functional.RATE_RATIO:
            values = np.abs(x_end) / horizon ** self.rate_exponent
        elif functional == Functional.ENVELOPE_SUP:
            values = sup
        else:
            values = np.where(exploded, result.tau_e, np.inf)

        failed = [
            (int(i), "NonConvergentStep: step control gave up")
            for i in path_indices[result.nonconvergent]
        ]
        return dict(
            path_indices=path_indices, values=values, exploded=exploded, ok=ok, failed=failed
        )

    def _run_one_by_one(self, path_indices: np.ndarray) -> dict:
        parts = []
        failed = []
        for index in path_indices:
            single = np.array([index])
            try:
                parts.append(self._reduce(single, *self._simulate(single)))
            except TidlabError as error:
                failed.append((int(index), f"{type(error).__name__}: {error}"))
        return merge_blocks(parts + [_empty_block(failed)])


def _empty_block(failed: List[Tuple[int, str]]) -> dict:
    return dict(
        path_indices=np.array([], dtype=np.int64),
        values=np.array([]),
        exploded=np.array([], dtype=bool),
        ok=np.array([], dtype=bool),
        failed=failed,
    )


def merge_blocks(blocks: List[dict]) -> dict:
    """Concatenate block outcomes in path-index order"""
    blocks = [b for b in blocks if len(b["path_indices"]) or b["failed"]]
    if not blocks:
        blocks = [_empty_block([])]
    merged = {
        key: np.concatenate([b[key] for b in blocks])
        for key in ("path_indices", "values", "exploded", "ok")
    }
    order = np.argsort(merged["path_indices"], kind="stable")
    merged = {key: value[order] for key, value in merged.items()}
    merged["failed"] = sorted(f for b in blocks for f in b["failed"])
    return merged


def worker_count() -> int:
    """Workers from TIDLAB_THREADS: unset -> 1, 0 -> all cores, n -> n"""
    raw = os.environ.get("TIDLAB_THREADS")
    if raw is None or raw.strip() == "":
        return 1
    count = int(raw)
    assert count >= 0, "TIDLAB_THREADS must be nonnegative"
    return count if count > 0 else (os.cpu_count() or 1)


def _run_blocks_with_ray(
    spec: EnsembleSpec, blocks: List[np.ndarray], n_workers: int
) -> List[dict]:
    ray.init(num_cpus=n_workers, ignore_reinit_error=True, include_dashboard=False)
    workers = [
        ray.remote(num_cpus=1)(EnsembleWorker).remote(spec)
        for _ in range(min(n_workers, len(blocks)))
    ]

    queue = list(blocks)
    pending = {}
    for worker in workers:
        if queue:
            pending[worker.run_block.remote(queue.pop(0))] = worker

    outcomes = []
    while pending:
        done_ids, _ = ray.wait(list(pending))
        for done_id in done_ids:
            outcomes.append(ray.get(done_id))
            worker = pending.pop(done_id)
            if queue:
                pending[worker.run_block.remote(queue.pop(0))] = worker
    return outcomes


def run_ensemble(spec: EnsembleSpec, n_workers: Optional[int] = None) -> EnsembleResult:
    """Simulate spec.n_paths paths with streams (seed, i) and reduce them.

    TerminalNormalized, TerminalRaw, RateRatio and EnvelopeSup keep the
    survivors only; ExplosionIndicator, ExplosionTime and GirsanovWeight keep
    every path that finished. Output order is by path index whatever the
    number of workers.
    """
    if n_workers is None:
        n_workers = worker_count()
    indices = np.arange(spec.n_paths)
    n_blocks = max(int(np.ceil(spec.n_paths / BLOCK_SIZE)), min(n_workers, spec.n_paths))
    if n_workers > 1:
        n_blocks = max(n_blocks, min(4 * n_workers, spec.n_paths))
    blocks = [block for block in np.array_split(indices, n_blocks) if len(block)]

    if n_workers > 1:
        outcomes = _run_blocks_with_ray(spec, blocks, n_workers)
    else:
        worker = EnsembleWorker(spec)
        outcomes = [worker.run_block(block) for block in blocks]
    merged = merge_blocks(outcomes)

    ok, exploded = merged["ok"], merged["exploded"]
    survivors = ok & ~exploded
    keep_all = spec.functional in (
        Functional.EXPLOSION_INDICATOR,
        Functional.EXPLOSION_TIME,
        Functional.GIRSANOV_WEIGHT,
    )
    keep = ok if keep_all else survivors
    return EnsembleResult(
        samples=merged["values"][keep],
        path_indices=merged["path_indices"][keep],
        n_survivors=int(survivors.sum()),
        n_exploded=int((ok & exploded).sum()),
        failed=merged["failed"],
    )
