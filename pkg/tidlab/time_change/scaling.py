"""Scaling transformation between the original and time-changed equations.

A path w on [1, inf) maps to s -> w(phi(s)) / sqrt(phi'(s)) on [0, t1). The
transformed process solves

    dY = dW + (rho a(s) sgn(Y)|Y|^alpha - b(s) Y) ds

with a = phi'^((alpha+1)/2) / phi^beta and b = phi'' / (2 phi').
"""
from typing import Tuple

import numpy as np

from tidlab.common.errors import SingularPoint
from tidlab.common.utils.common_utils import ArrayLike, is_close, signed_power
from tidlab.model.params import Params
from tidlab.time_change.path import KilledPath
from tidlab.time_change.time_change import T1_CAP, TimeChange


def scaling_apply(tc: TimeChange, path: KilledPath) -> KilledPath:
    """Map a path of the original equation on [1, inf) to transformed time"""
    assert path.t_start == 1.0, "scaling_apply needs a path started at t = 1"
    times = np.asarray(path.times, dtype=float)
    s = np.asarray(tc.inverse(times), dtype=float)
    s[0] = 0.0
    values = np.asarray(path.values, dtype=float) / np.sqrt(tc.phi_prime_at(times))
    killing_time = None
    if path.killing_time is not None:
        killing_time = float(tc.inverse(path.killing_time))
    return KilledPath(0.0, s, values, killing_time)


def scaling_invert(tc: TimeChange, path: KilledPath) -> KilledPath:
    """Map a transformed path on [0, t1) back to the original time scale"""
    assert path.t_start == 0.0, "scaling_invert needs a path started at s = 0"
    phi, phi_prime, _ = tc.evaluate(np.asarray(path.times, dtype=float))
    phi = np.atleast_1d(phi).astype(float)
    phi[0] = 1.0
    values = np.sqrt(np.atleast_1d(phi_prime)) * np.asarray(path.values, dtype=float)
    killing_time = None
    if path.killing_time is not None and path.killing_time < tc.t1:
        # killing at t1 corresponds to a path alive for all original time
        killing_time = float(tc.phi(path.killing_time))
    return KilledPath(1.0, phi, values, killing_time)


def drift_coefficients(p: Params, tc: TimeChange, s: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Closed-form (a(s), b(s)) of the transformed drift"""
    s_arr = np.asarray(s, dtype=float)
    phi, _, _ = tc.evaluate(s_arr)
    if tc.is_exponential:
        a = np.exp(((p.alpha + 1.0) / 2.0 - p.beta) * s_arr)
        b = np.full_like(s_arr, 0.5)
    else:
        power = tc.gamma * (p.alpha + 1.0) / 2.0 - p.beta
        a = np.ones_like(s_arr) if is_close(power, 0.0) else np.asarray(phi) ** power
        if tc.finite_horizon:
            b = tc.delta / (tc.t1 - np.minimum(s_arr, tc.t1 * (1.0 - T1_CAP)))
        else:
            b = tc.gamma / (2.0 * (1.0 + (1.0 - tc.gamma) * s_arr))
    if np.ndim(s_arr) == 0:
        return float(a), float(b)
    return a, b


def transformed_drift(p: Params, tc: TimeChange, s: ArrayLike, y: ArrayLike) -> ArrayLike:
    """Drift of the time-changed equation at (s, y), closed form per change of time"""
    y_arr = np.asarray(y, dtype=float)
    if p.alpha < 0 and np.any(y_arr == 0):
        raise SingularPoint(f"transformed drift is singular at y = 0 for alpha = {p.alpha}")
    a, b = drift_coefficients(p, tc, s)
    value = p.rho * a * signed_power(y_arr, p.alpha) - b * y_arr
    return float(value) if np.ndim(value) == 0 else value


def transformed_drift_generic(
    p: Params, tc: TimeChange, s: ArrayLike, y: ArrayLike
) -> ArrayLike:
    """Same drift computed from phi, phi', phi'' without specialization"""
    y_arr = np.asarray(y, dtype=float)
    if p.alpha < 0 and np.any(y_arr == 0):
        raise SingularPoint(f"transformed drift is singular at y = 0 for alpha = {p.alpha}")
    phi, phi_prime, phi_second = tc.evaluate(s)
    a = np.asarray(phi_prime) ** ((p.alpha + 1.0) / 2.0) / np.asarray(phi) ** p.beta
    value = p.rho * a * signed_power(y_arr, p.alpha) - np.asarray(phi_second) / np.asarray(
        phi_prime
    ) * y_arr / 2.0
    return float(value) if np.ndim(value) == 0 else value
