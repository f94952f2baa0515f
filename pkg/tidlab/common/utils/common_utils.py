import math
from typing import Tuple, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

# Tolerance used when comparing 2*beta against alpha + 1 and similar boundaries
BOUNDARY_TOL = 1e-12


def compare(lhs: float, rhs: float, tol: float = BOUNDARY_TOL) -> int:
    """Return -1, 0 or 1 as lhs is below, on or above rhs (up to tol)"""
    if math.isclose(lhs, rhs, rel_tol=0.0, abs_tol=tol):
        return 0
    return -1 if lhs < rhs else 1


def is_close(lhs: float, rhs: float, tol: float = BOUNDARY_TOL) -> bool:
    return compare(lhs, rhs, tol) == 0


def signed_power(x: ArrayLike, alpha: float) -> np.ndarray:
    """Return sgn(x)|x|^alpha with sgn(0) := 0"""
    x = np.asarray(x, dtype=float)
    abs_x = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        powered = np.where(abs_x > 0.0, abs_x, 1.0) ** alpha
    return np.where(abs_x > 0.0, np.sign(x) * powered, 0.0)


def kahan_add(
    total: np.ndarray, compensation: np.ndarray, increment: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Compensated summation step; returns (new_total, new_compensation)"""
    y = increment - compensation
    new_total = total + y
    new_compensation = (new_total - total) - y
    return new_total, new_compensation


def format_float(value: float) -> str:
    """Serialize a float with 17 significant digits (round-trip exact)"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    return format(float(value), ".17g")
