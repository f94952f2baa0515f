from typing import Tuple

import numpy as np

from tidlab.common.errors import EmptySample, InvalidParameters, NoLimitLaw
from tidlab.common.utils.common_utils import compare
from tidlab.laws.descriptor import LimitLawDescriptor
from tidlab.model.params import Params
from tidlab.model.regime import NormalizationSpec, Recurrence, Regime
from tidlab.time_change.path import KilledPath
from tidlab.time_change.time_change import make_power


def limit_package(regime: Regime, p: Params) -> Tuple[NormalizationSpec, LimitLawDescriptor]:
    """(n(t), law) such that X_t / n(t) converges to law.

    Partial-explosion regimes return the package of the non-explosive part.
    """
    if regime.recurrence == Recurrence.EXPLODES_AS:
        raise NoLimitLaw(
            f"(rho={p.rho}, alpha={p.alpha}, beta={p.beta}) explodes a.s.; "
            f"use blowup_profile instead"
        )
    if regime.recurrence == Recurrence.EXPLODES_WITH_PARTIAL_PROBABILITY:
        regime = regime.conditional
    return regime.normalization, regime.limit_law


def blowup_profile(p: Params, tau_e: float, t: float) -> float:
    """Asymptotic |X_t| as t increases to the explosion time tau_e"""
    side = compare(2.0 * p.beta, p.alpha + 1.0)
    if not (p.rho > 0 and p.alpha > 1 and side <= 0):
        raise InvalidParameters("blowup_profile needs rho > 0, alpha > 1, 2 beta <= alpha + 1")
    if not t < tau_e:
        raise InvalidParameters(f"t = {t} must precede tau_e = {tau_e}")
    denominator = (p.rho * (p.alpha - 1.0) * (tau_e - t)) ** (1.0 / (p.alpha - 1.0))
    if side == 0:
        return tau_e ** ((p.alpha + 1.0) / (2.0 * (p.alpha - 1.0))) / denominator

    # Below the line the transformed path follows 1 / (rho (alpha-1) (s_e - s))^(1/(alpha-1));
    # mapping back through phi gives the factor phi^(gamma/(alpha-1))(s_e) tau_e^(gamma/2).
    tc = make_power(p.alpha, p.beta)
    phi_at_explosion = tc.phi(tc.inverse(tau_e))
    numerator = phi_at_explosion ** (tc.gamma / (p.alpha - 1.0)) * tau_e ** (tc.gamma / 2.0)
    return numerator / denominator


def fit_blowup_exponent(
    path: KilledPath, tau_e: float, window: Tuple[float, float] = (1e-6, 1e-5)
) -> float:
    """Slope of log|X_t| against log(tau_e - t) for tau_e - t inside window"""
    times = np.asarray(path.times)
    values = np.abs(np.asarray(path.values))
    gap = tau_e - times
    inside = (gap >= window[0]) & (gap <= window[1]) & (values > 0)
    if inside.sum() < 3:
        raise EmptySample(f"only {inside.sum()} grid points fall inside the fit window")
    slope, _ = np.polyfit(np.log(gap[inside]), np.log(values[inside]), 1)
    return float(slope)
