import math

import numpy as np

from tidlab.common.errors import SingularPoint
from tidlab.common.utils.common_utils import ArrayLike, signed_power
from tidlab.model.params import Params


def drift(p: Params, t: ArrayLike, x: ArrayLike) -> ArrayLike:
    """Drift rho sgn(x)|x|^alpha / t^beta, with sgn(0) := 0.

    Works on scalars and arrays; scalars in, float out.
    """
    t_arr = np.asarray(t, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("drift needs t > 0")
    if p.alpha < 0 and np.any(x_arr == 0):
        raise SingularPoint(f"drift is singular at x = 0 for alpha = {p.alpha}")
    value = p.rho * signed_power(x_arr, p.alpha) / t_arr ** p.beta
    if np.ndim(value) == 0:
        return float(value)
    return value


def potential(p: Params, t: float, x: float) -> float:
    """Potential V with -1/2 dV/dx = drift; logarithmic at alpha = -1"""
    if x == 0:
        raise SingularPoint("potential is singular at x = 0")
    if t <= 0:
        raise ValueError("potential needs t > 0")
    if p.alpha == -1:
        return -2.0 * p.rho * math.log(abs(x)) / t ** p.beta
    return -(2.0 * p.rho / (p.alpha + 1.0)) * abs(x) ** (p.alpha + 1.0) / t ** p.beta
