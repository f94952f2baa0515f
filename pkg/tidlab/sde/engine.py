from typing import Optional, Tuple

import numpy as np

from tidlab.build import build_scheme
from tidlab.common.abstract.scheme import Scheme
from tidlab.common.errors import InvalidParameters, OutOfDomain
from tidlab.model.params import Params, require_valid
from tidlab.sde.config import ExplosionReport, SchemeKind, SimConfig
from tidlab.sde.drift import DriftModel
from tidlab.sde.integrator import BatchIntegrator
from tidlab.sde.schemes import ZeroNoiseODE
from tidlab.time_change.path import KilledPath
from tidlab.time_change.time_change import TimeChange


def resolve_scheme_kind(p: Params, sim_cfg: SimConfig) -> SchemeKind:
    """Scheme for Auto: by the sign of alpha + 1, Euler-Maruyama when rho = 0"""
    if sim_cfg.scheme != SchemeKind.AUTO:
        return sim_cfg.scheme
    if p.rho == 0 or p.alpha > -1:
        return SchemeKind.DIRECT_EM
    if p.alpha == -1:
        return SchemeKind.SQUARED_PROCESS
    return SchemeKind.POSITIVITY_PRESERVING


def check_simulation_inputs(p: Params, sim_cfg: SimConfig):
    require_valid(p)
    if sim_cfg.explosion_threshold <= max(abs(p.x0), 1.0):
        raise InvalidParameters("explosion_threshold must exceed max(|x0|, 1)")
    kind = resolve_scheme_kind(p, sim_cfg)
    if kind == SchemeKind.SQUARED_PROCESS and p.alpha != -1:
        raise InvalidParameters("the squared-process scheme needs alpha = -1")
    if kind == SchemeKind.POSITIVITY_PRESERVING and not (p.alpha < -1 and p.rho > 0):
        raise InvalidParameters("the positivity-preserving scheme needs alpha < -1, rho > 0")


def make_integrator(
    p: Params,
    sim_cfg: SimConfig,
    time_change: Optional[TimeChange] = None,
    original_coordinates: bool = True,
) -> BatchIntegrator:
    check_simulation_inputs(p, sim_cfg)
    scheme = build_scheme(p, sim_cfg, resolve_scheme_kind(p, sim_cfg))
    return BatchIntegrator(p, sim_cfg, scheme, time_change, original_coordinates)


def _single_path(
    integrator: BatchIntegrator, u_end: float, path_index: int
) -> Tuple[KilledPath, ExplosionReport]:
    scheme = integrator.scheme
    if isinstance(scheme, ZeroNoiseODE):
        return _zero_noise_path(integrator, scheme, u_end)

    result = integrator.run([path_index], u_end)
    report = result.report(0)
    if result.paths is not None:
        return result.paths[0], report
    t_start = 1.0 if integrator.original_coordinates else integrator.model.u_start
    times = np.array([t_start, result.terminal_time[0]])
    values = np.array([integrator.params.x0, result.terminal_value[0]])
    return KilledPath(t_start, times, values, report.tau_e_estimate), report


def _zero_noise_path(
    integrator: BatchIntegrator, scheme: ZeroNoiseODE, u_end: float
) -> Tuple[KilledPath, ExplosionReport]:
    model: DriftModel = integrator.model
    u, y, crossed = scheme.solve(model, integrator.params.x0, u_end)
    explosive = integrator.explosive and crossed
    tau_u = None
    if explosive:
        tau_u = min(float(model.explosion_time(u[-1], y[-1])), u_end)

    if integrator.original_coordinates:
        times, values = model.to_original(u, y)
        tau = None if tau_u is None else model.original_time(tau_u)
        censored_at = model.original_time(u_end)
    else:
        times, values, tau, censored_at = u, y, tau_u, u_end
    times = np.asarray(times, dtype=float)
    report = ExplosionReport(
        exploded=explosive,
        tau_e_estimate=tau,
        last_value=float(values[-1]),
        censored_at=censored_at,
        threshold_crossing_time=float(times[-1]) if explosive else None,
    )
    return KilledPath(times[0], times, np.asarray(values, dtype=float), tau), report


def simulate(
    p: Params, sim_cfg: SimConfig, horizon: float, path_index: int = 0
) -> Tuple[KilledPath, ExplosionReport]:
    """Simulate one killed path of the original equation on [1, horizon].

    Paths are censored at the horizon; exploded paths end at the threshold
    crossing and carry the profile-inverted explosion time as killing time.
    Without store_full_path the returned path holds its two end points.
    """
    if not horizon > 1:
        raise InvalidParameters(f"horizon must exceed 1, got {horizon}")
    integrator = make_integrator(p, sim_cfg)
    return _single_path(integrator, horizon, path_index)


def simulate_transformed(
    p: Params, tc: TimeChange, sim_cfg: SimConfig, s_horizon: float, path_index: int = 0
) -> KilledPath:
    """Simulate the time-changed equation on [0, s_horizon], in transformed coordinates"""
    if not 0 < s_horizon < tc.t1:
        raise OutOfDomain(f"s_horizon must lie in (0, {tc.t1}), got {s_horizon}")
    integrator = make_integrator(p, sim_cfg, tc, original_coordinates=False)
    path, _ = _single_path(integrator, s_horizon, path_index)
    return path


def scheme_for(p: Params, sim_cfg: SimConfig) -> Scheme:
    """Scheme instance Auto resolves to, for inspection"""
    return build_scheme(p, sim_cfg, resolve_scheme_kind(p, sim_cfg))
