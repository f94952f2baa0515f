from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from tidlab.common.abstract.scheme import Scheme
from tidlab.common.utils.common_utils import kahan_add
from tidlab.common.utils.rng import NormalStreams
from tidlab.model.params import Params
from tidlab.sde.config import ExplosionReport, SimConfig
from tidlab.sde.drift import DriftModel
from tidlab.time_change.path import KilledPath
from tidlab.time_change.time_change import TimeChange


@dataclass
class BatchResult:
    """Per-path outcome of a batch integration

    Attributes:
        path_indices (np.ndarray): stream index of every row
        terminal_time (np.ndarray): last grid time
        terminal_value (np.ndarray): value at the last grid time
        exploded (np.ndarray): threshold crossed
        tau_e (np.ndarray): estimated explosion time, nan when not exploded
        crossing_time (np.ndarray): grid time of the threshold crossing
        nonconvergent (np.ndarray): refinement or positivity retries gave up
        censored_at (float): horizon
        paths (list): stored KilledPath per row when store_full_path is set

    """

    path_indices: np.ndarray
    terminal_time: np.ndarray
    terminal_value: np.ndarray
    exploded: np.ndarray
    tau_e: np.ndarray
    crossing_time: np.ndarray
    nonconvergent: np.ndarray
    censored_at: float
    paths: Optional[List[KilledPath]] = None

    def __len__(self) -> int:
        return len(self.path_indices)

    def report(self, row: int) -> ExplosionReport:
        exploded = bool(self.exploded[row])
        return ExplosionReport(
            exploded=exploded,
            tau_e_estimate=float(self.tau_e[row]) if exploded else None,
            last_value=float(self.terminal_value[row]),
            censored_at=self.censored_at,
            threshold_crossing_time=float(self.crossing_time[row]) if exploded else None,
            nonconvergent=bool(self.nonconvergent[row]),
        )


class BatchIntegrator:
    """Advance a batch of independent paths to a common horizon

    Every row draws its normals from its own stream (seed, path_index), and
    its step sizes depend on its own state only, so a path is the same
    whichever batch it runs in.

    Attributes:
        params (Params): model parameters
        sim_cfg (SimConfig): discretization settings
        scheme (Scheme): one-step scheme
        model (DriftModel): drift in the integration variable
        explosive (bool): rho > 0 and alpha > 1; explosion detection is on
        refine (bool): geometric step refinement is on
        original_coordinates (bool): report (t, x) rather than (u, y)

    """

    def __init__(
        self,
        params: Params,
        sim_cfg: SimConfig,
        scheme: Scheme,
        time_change: Optional[TimeChange] = None,
        original_coordinates: bool = True,
    ):
        self.params = params
        self.original_coordinates = original_coordinates
        self.sim_cfg = sim_cfg
        self.scheme = scheme
        self.model = DriftModel(params, time_change)
        self.explosive = params.rho > 0 and params.alpha > 1
        self.refine = sim_cfg.adapt and self.explosive

    def _refine_steps(self, u: np.ndarray, x: np.ndarray, remaining: np.ndarray):
        """Halve dt until h |drift| <= rel_step max(|x|, 1), down to the floor"""
        cfg = self.sim_cfg
        drift = np.abs(self.scheme.drift(self.model, u, x))
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            ratio = cfg.dt * drift / (cfg.rel_step * np.maximum(np.abs(x), 1.0))
            k = np.ceil(np.log2(np.maximum(np.nan_to_num(ratio, nan=np.inf), 1.0)))
            h = cfg.dt * np.exp2(-k)
        at_floor = h <= cfg.refine_floor
        h = np.maximum(h, cfg.refine_floor)
        return np.minimum(h, remaining), at_floor

    def _coords(self, u: np.ndarray, y: np.ndarray):
        if self.original_coordinates:
            return self.model.to_original(u, y)
        return u, y

    def run(
        self, path_indices: Sequence[int], u_end: float, observers: Sequence = ()
    ) -> BatchResult:
        """Integrate rows path_indices from the model start to u_end.

        Observers receive update(rows, t, x) in reported coordinates after the
        initial point and after every accepted step.
        """
        cfg, model, scheme = self.sim_cfg, self.model, self.scheme
        path_indices = np.asarray(path_indices, dtype=np.int64)
        n = len(path_indices)
        assert u_end > model.u_start, "horizon must lie after the starting time"

        streams = NormalStreams(cfg.seed, path_indices)
        u = np.full(n, model.u_start)
        compensation = np.zeros(n)
        state = scheme.to_state(np.full(n, self.params.x0))
        values = scheme.to_value(state)
        active = np.ones(n, dtype=bool)
        exploded = np.zeros(n, dtype=bool)
        nonconvergent = np.zeros(n, dtype=bool)
        tau_u = np.full(n, np.nan)
        floor_steps = np.zeros(n, dtype=np.int64)
        step_count = np.zeros(n, dtype=np.int64)

        stored_u = stored_y = None
        if cfg.store_full_path:
            stored_u = [[model.u_start] for _ in range(n)]
            stored_y = [[self.params.x0] for _ in range(n)]

        all_rows = np.arange(n)
        for observer in observers:
            observer.update(all_rows, *self._coords(u, values))

        while active.any():
            rows = np.flatnonzero(active)
            u_rows = u[rows]
            remaining = u_end - u_rows
            h = np.minimum(cfg.dt, remaining)
            at_floor = np.zeros(len(rows), dtype=bool)
            if self.refine:
                h, at_floor = self._refine_steps(u_rows, values[rows], remaining)

            z = streams.draw(rows) if scheme.stochastic else np.zeros(len(rows))
            new_state, rejected = scheme.step(model, u_rows, state[rows], h, z)
            halvings = 0
            while rejected.any() and halvings < cfg.max_halvings:
                halvings += 1
                retry = np.flatnonzero(rejected)
                h[retry] = h[retry] / 2.0
                retry_state, retry_rejected = scheme.step(
                    model, u_rows[retry], state[rows[retry]], h[retry], streams.draw(rows[retry])
                )
                new_state[retry] = retry_state
                rejected = np.zeros(len(rows), dtype=bool)
                rejected[retry] = retry_rejected

            gave_up = rows[rejected]
            nonconvergent[gave_up] = True
            active[gave_up] = False

            ok = ~rejected
            rows, h, remaining = rows[ok], h[ok], remaining[ok]
            at_floor, new_state = at_floor[ok], new_state[ok]
            landing = h >= remaining
            u_new, comp_new = kahan_add(u[rows], compensation[rows], h)
            u[rows] = np.where(landing, u_end, u_new)
            compensation[rows] = np.where(landing, 0.0, comp_new)
            state[rows] = new_state
            new_values = scheme.to_value(new_state)
            values[rows] = new_values
            step_count[rows] += 1

            crossed = np.zeros(len(rows), dtype=bool)
            if self.explosive:
                crossed = ~(np.abs(new_values) < cfg.explosion_threshold)
                if crossed.any():
                    hit = rows[crossed]
                    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                        tau = model.explosion_time(u[hit], values[hit])
                    tau = np.where(np.isfinite(tau), tau, u[hit])
                    tau_u[hit] = np.minimum(tau, u_end)
                    exploded[hit] = True
                    active[hit] = False

                floor_steps[rows] = np.where(at_floor, floor_steps[rows] + 1, 0)
                stuck = rows[(floor_steps[rows] > cfg.max_floor_steps) & ~crossed]
                nonconvergent[stuck] = True
                active[stuck] = False

            finished = rows[u[rows] >= u_end]
            active[finished] = False

            if stored_u is not None:
                keep = (step_count[rows] % cfg.record_every == 0) | ~active[rows]
                for row in rows[keep]:
                    stored_u[row].append(u[row])
                    stored_y[row].append(values[row])

            for observer in observers:
                observer.update(rows, *self._coords(u[rows], values[rows]))

        return self._collect(
            path_indices, u, values, exploded, tau_u, nonconvergent, u_end, stored_u, stored_y
        )

    def _collect(
        self, path_indices, u, values, exploded, tau_u, nonconvergent, u_end, stored_u, stored_y
    ) -> BatchResult:
        model = self.model
        terminal_time, terminal_value = self._coords(u, values)
        tau_e = np.full(len(u), np.nan)
        crossing_time = np.full(len(u), np.nan)
        if exploded.any():
            tau_e[exploded] = self._coords(tau_u[exploded], np.zeros(exploded.sum()))[0]
            crossing_time[exploded] = terminal_time[exploded]

        paths = None
        if stored_u is not None:
            paths = []
            for row in range(len(u)):
                times, path_values = self._coords(
                    np.asarray(stored_u[row]), np.asarray(stored_y[row])
                )
                killing_time = float(tau_e[row]) if exploded[row] else None
                times = np.asarray(times, dtype=float)
                paths.append(
                    KilledPath(times[0], times, np.asarray(path_values), killing_time)
                )

        return BatchResult(
            path_indices=path_indices,
            terminal_time=np.asarray(terminal_time, dtype=float),
            terminal_value=np.asarray(terminal_value, dtype=float),
            exploded=exploded,
            tau_e=tau_e,
            crossing_time=crossing_time,
            nonconvergent=nonconvergent,
            censored_at=model.original_time(u_end) if self.original_coordinates else u_end,
            paths=paths,
        )
