"""Girsanov functional of the delta-Brownian bridge.

With gamma = 2 beta / (alpha + 1) > 1 the non-explosion probability equals
E[exp(int rho sgn(b)|b|^alpha dW - 1/2 int rho^2 |b|^(2 alpha) ds)] over
[0, t1), where db = dW - delta b / (t1 - s) ds and b_0 = x0.
"""
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from tidlab.common.errors import InvalidParameters
from tidlab.common.utils.common_utils import compare, signed_power
from tidlab.common.utils.rng import NormalStreams
from tidlab.model.params import Params
from tidlab.sde.config import SimConfig
from tidlab.time_change.time_change import make_power

# Default tail cut as a fraction of t1
EPS_CUT_FRACTION = 1e-4


def check_bridge_region(p: Params):
    if not (p.rho > 0 and p.alpha > 1 and compare(2.0 * p.beta, p.alpha + 1.0) > 0):
        raise InvalidParameters("the bridge needs rho > 0, alpha > 1, 2 beta > alpha + 1")


def default_eps_cut(p: Params) -> float:
    return make_power(p.alpha, p.beta).t1 * EPS_CUT_FRACTION


def bridge_exponent(
    p: Params,
    sim_cfg: SimConfig,
    eps_cut: float,
    n_paths: int,
    draw: Callable[[np.ndarray], np.ndarray],
) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate the bridge and the Girsanov exponent up to t1 - eps_cut.

    Steps are min(dt, (t1 - s) / 4), so they shrink geometrically near t1.
    The integrands are evaluated at the left end of each step. `draw(rows)`
    supplies one standard normal per row. Returns (exponent, b at the cut).
    """
    tc = make_power(p.alpha, p.beta)
    t1, delta = tc.t1, tc.delta
    assert 0 < eps_cut < t1, "eps_cut must lie in (0, t1)"
    s_end = t1 - eps_cut

    rows = np.arange(n_paths)
    b = np.full(n_paths, p.x0)
    exponent = np.zeros(n_paths)
    s = 0.0
    while s < s_end:
        h = min(sim_cfg.dt, (t1 - s) / 4.0, s_end - s)
        dw = np.sqrt(h) * draw(rows)
        g = p.rho * signed_power(b, p.alpha)
        exponent += g * dw - 0.5 * g * g * h
        b = b + dw - delta * b * h / (t1 - s)
        s = s_end if h == s_end - s else s + h
    return exponent, b


def bridge_weights(
    p: Params,
    sim_cfg: SimConfig,
    eps_cut: Optional[float] = None,
    path_indices: Sequence[int] = (0,),
) -> np.ndarray:
    """exp(exponent) for each path index, each from its own normal stream"""
    check_bridge_region(p)
    if eps_cut is None:
        eps_cut = default_eps_cut(p)
    streams = NormalStreams(sim_cfg.seed, path_indices)
    exponent, _ = bridge_exponent(p, sim_cfg, eps_cut, len(streams), streams.draw)
    with np.errstate(over="ignore"):
        return np.exp(exponent)


def simulate_bridge_functional(
    p: Params, sim_cfg: SimConfig, eps_cut: Optional[float] = None, path_index: int = 0
) -> float:
    """One draw of the Girsanov weight whose mean is P(tau_e = inf)"""
    return float(bridge_weights(p, sim_cfg, eps_cut, [path_index])[0])
