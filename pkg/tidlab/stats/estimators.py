"""Statistical verdicts built on ensembles: explosion probabilities, rate
checks and finite-horizon envelope diagnostics."""
from dataclasses import dataclass, field
from enum import Enum
import math
from typing import Optional, Tuple
import warnings

import numpy as np
import scipy.stats

from tidlab.common.errors import (
    DiagnosticWarning,
    EmptySample,
    HeavyTailWarning,
    InvalidParameters,
)
from tidlab.common.utils.common_utils import compare, is_close
from tidlab.laws.densities import law_cdf
from tidlab.laws.descriptor import LawKind
from tidlab.laws.rates import transient_rate
from tidlab.model.envelope import EnvelopeSpec
from tidlab.model.params import Params, require_valid
from tidlab.model.regime import classify
from tidlab.sde.bridge import check_bridge_region, default_eps_cut
from tidlab.sde.config import SimConfig
from tidlab.stats.ensemble import EnsembleSpec, Functional, run_ensemble
from tidlab.stats.ks import KSReport, ks_distance

# Two-sided 95% normal quantile
Z_95 = float(scipy.stats.norm.ppf(0.975))

# Pearson kurtosis above which the normal-approximation CI is flagged
KURTOSIS_LIMIT = 100.0


class CIMethod(Enum):
    WILSON = "Wilson"
    NORMAL_APPROX = "NormalApprox"


@dataclass(frozen=True)
class EstimateWithCI:
    """Point estimate with a 95% confidence interval

    Attributes:
        value (float): point estimate
        ci_low (float): lower end of the interval
        ci_high (float): upper end of the interval
        n (int): sample size
        method (CIMethod): Wilson for proportions, NormalApprox for means
        reliable (bool): False when the interval is known to be untrustworthy
        doubling_delta (float): estimate at twice the horizon minus the estimate,
            for censored explosion fractions

    """

    value: float
    ci_low: float
    ci_high: float
    n: int
    method: CIMethod
    reliable: bool = True
    doubling_delta: Optional[float] = None

    def __post_init__(self):
        assert self.ci_low <= self.value <= self.ci_high, "interval must contain the estimate"

    def overlaps(self, other: "EstimateWithCI") -> bool:
        return self.ci_low <= other.ci_high and other.ci_low <= self.ci_high

    def complement(self) -> "EstimateWithCI":
        """Estimate of 1 - value with the mirrored interval"""
        return EstimateWithCI(
            1.0 - self.value,
            1.0 - self.ci_high,
            1.0 - self.ci_low,
            self.n,
            self.method,
            self.reliable,
            None if self.doubling_delta is None else -self.doubling_delta,
        )

    def to_dict(self) -> dict:
        return dict(
            value=self.value,
            ci_low=self.ci_low,
            ci_high=self.ci_high,
            n=self.n,
            method=self.method.value,
            reliable=self.reliable,
            doubling_delta=self.doubling_delta,
        )


def wilson_interval(k: int, n: int, z: float = Z_95) -> EstimateWithCI:
    """Wilson score interval for k successes out of n"""
    if n <= 0:
        raise EmptySample("a proportion needs at least one trial")
    assert 0 <= k <= n
    p_hat = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p_hat + z2 / (2.0 * n)) / denom
    margin = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom
    low = min(max(center - margin, 0.0), p_hat)
    high = max(min(center + margin, 1.0), p_hat)
    return EstimateWithCI(p_hat, low, high, n, CIMethod.WILSON)


def mean_interval(samples: np.ndarray, z: float = Z_95) -> EstimateWithCI:
    """Sample mean with mean +- z sd / sqrt(n)"""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptySample("a mean needs at least one sample")
    mean = float(np.mean(samples))
    sd = float(np.std(samples, ddof=1)) if samples.size > 1 else 0.0
    half = z * sd / math.sqrt(samples.size)
    return EstimateWithCI(mean, mean - half, mean + half, samples.size, CIMethod.NORMAL_APPROX)


def _direct_time_change(p: Params) -> Optional[str]:
    """Above the critical line the power change of time maps [1, inf) onto [0, t1)"""
    if compare(2.0 * p.beta, p.alpha + 1.0) > 0:
        return "power"
    return None


def explosion_prob_direct(
    p: Params, sim_cfg: SimConfig, n: int, horizon: float, time_change: Optional[str] = "auto"
) -> EstimateWithCI:
    """Wilson interval on the fraction of paths exploded by the horizon.

    This estimates P(tau_e <= horizon), a lower bound for P(tau_e < inf). The
    same paths are run on to twice the horizon and doubling_delta reports the
    extra fraction exploded in (horizon, 2 horizon]. Triples that cannot
    explode (rho <= 0 or alpha <= 1) give 0 without simulating.
    """
    require_valid(p)
    if not horizon > 1:
        raise InvalidParameters(f"horizon must exceed 1, got {horizon}")
    if not (p.rho > 0 and p.alpha > 1):
        estimate = wilson_interval(0, n)
        return EstimateWithCI(
            estimate.value, estimate.ci_low, estimate.ci_high, n, CIMethod.WILSON, True, 0.0
        )

    if time_change == "auto":
        time_change = _direct_time_change(p)
    result = run_ensemble(
        EnsembleSpec(
            params=p,
            sim_cfg=sim_cfg,
            n_paths=n,
            horizon=2.0 * horizon,
            functional=Functional.EXPLOSION_TIME,
            time_change=time_change,
        )
    )
    tau = result.samples
    n_done = len(tau)
    if n_done == 0:
        raise EmptySample("every path failed")
    k_horizon = int(np.sum(tau <= horizon))
    k_doubled = int(np.sum(np.isfinite(tau)))
    estimate = wilson_interval(k_horizon, n_done)
    return EstimateWithCI(
        estimate.value,
        estimate.ci_low,
        estimate.ci_high,
        n_done,
        CIMethod.WILSON,
        True,
        (k_doubled - k_horizon) / n_done,
    )


def girsanov_weights(
    p: Params, sim_cfg: SimConfig, n: int, eps_cut: Optional[float] = None
) -> np.ndarray:
    check_bridge_region(p)
    result = run_ensemble(
        EnsembleSpec(
            params=p,
            sim_cfg=sim_cfg,
            n_paths=n,
            horizon=2.0,
            functional=Functional.GIRSANOV_WEIGHT,
            eps_cut=eps_cut,
        )
    )
    return result.samples


def explosion_prob_girsanov(
    p: Params, sim_cfg: SimConfig, n: int, eps_cut: Optional[float] = None
) -> EstimateWithCI:
    """Mean of n bridge Girsanov weights, an estimate of P(tau_e = inf).

    Emits HeavyTailWarning and marks the estimate unreliable when the Pearson
    kurtosis of the weights exceeds KURTOSIS_LIMIT.
    """
    weights = girsanov_weights(p, sim_cfg, n, eps_cut)
    estimate = mean_interval(weights)
    kurtosis = float(scipy.stats.kurtosis(weights, fisher=False)) if len(weights) > 3 else 0.0
    if kurtosis > KURTOSIS_LIMIT:
        warnings.warn(
            f"Girsanov weights have kurtosis {kurtosis:.3g} > {KURTOSIS_LIMIT:g}; "
            f"the normal-approximation interval is unreliable",
            HeavyTailWarning,
        )
        return EstimateWithCI(
            estimate.value, estimate.ci_low, estimate.ci_high, estimate.n, estimate.method, False
        )
    return estimate


@dataclass(frozen=True)
class EpsCutCheck:
    """Effect of halving the bridge tail cut on the Girsanov mean

    Attributes:
        eps_cut (float): tail cut under test
        mean_coarse (float): mean weight at eps_cut
        mean_fine (float): mean weight at eps_cut / 2, same streams
        standard_error (float): standard error of the mean at eps_cut
        passed (bool): |mean_fine - mean_coarse| < standard_error

    """

    eps_cut: float
    mean_coarse: float
    mean_fine: float
    standard_error: float
    passed: bool


def eps_cut_richardson_check(
    p: Params, sim_cfg: SimConfig, n: int, eps_cut: Optional[float] = None
) -> EpsCutCheck:
    """Halve eps_cut and compare the Monte Carlo means against one standard error"""
    if eps_cut is None:
        eps_cut = default_eps_cut(p)
    coarse = girsanov_weights(p, sim_cfg, n, eps_cut)
    fine = girsanov_weights(p, sim_cfg, n, eps_cut / 2.0)
    standard_error = float(np.std(coarse, ddof=1) / math.sqrt(len(coarse))) if n > 1 else 0.0
    mean_coarse, mean_fine = float(np.mean(coarse)), float(np.mean(fine))
    return EpsCutCheck(
        eps_cut,
        mean_coarse,
        mean_fine,
        standard_error,
        abs(mean_fine - mean_coarse) < standard_error,
    )


@dataclass(frozen=True)
class RateCheckResult:
    """Monte Carlo check of a deterministic rate or an almost-sure Gaussian limit

    Attributes:
        predicted (float): ell for |X_T| / T^nu, or the mean of the Gaussian limit
        estimate (EstimateWithCI): mean ratio across paths (alpha < 1)
        ks (KSReport): KS of X_T / n(T) against the Gaussian limit (alpha = 1)

    """

    predicted: float
    estimate: Optional[EstimateWithCI] = None
    ks: Optional[KSReport] = None

    def to_dict(self) -> dict:
        return dict(
            predicted=self.predicted,
            estimate=None if self.estimate is None else self.estimate.to_dict(),
            ks=None if self.ks is None else self.ks.to_dict(),
        )


def rate_check(
    p: Params,
    sim_cfg: SimConfig,
    n: int,
    horizon: float,
    time_change: Optional[str] = None,
    ks_threshold: Optional[float] = None,
) -> RateCheckResult:
    """For alpha < 1, mean and CI of |X_T| / T^nu against ell; for the
    almost-sure Gaussian limits at alpha = 1, KS of X_T / n(T) against the law.
    """
    require_valid(p)
    if p.alpha < 1 and not is_close(p.alpha, 1.0):
        ell, _ = transient_rate(p)
        result = run_ensemble(
            EnsembleSpec(
                params=p,
                sim_cfg=sim_cfg,
                n_paths=n,
                horizon=horizon,
                functional=Functional.RATE_RATIO,
                time_change=time_change,
            )
        )
        return RateCheckResult(predicted=ell, estimate=mean_interval(result.samples))

    regime = classify(p)
    law = regime.limit_law
    if not (is_close(p.alpha, 1.0) and regime.almost_sure_limit and law.kind == LawKind.GAUSSIAN):
        raise InvalidParameters(
            f"rate_check needs a deterministic rate (alpha < 1) or an almost-sure "
            f"Gaussian limit; regime is {regime.rule}"
        )
    result = run_ensemble(
        EnsembleSpec(
            params=p,
            sim_cfg=sim_cfg,
            n_paths=n,
            horizon=horizon,
            functional=Functional.TERMINAL_NORMALIZED,
            time_change=time_change,
            normalization=regime.normalization,
        )
    )
    report = ks_distance(result.samples, lambda x: law_cdf(law, x), ks_threshold)
    return RateCheckResult(predicted=law.mean, ks=report)


@dataclass(frozen=True)
class EnvelopeSummary:
    """Distribution of the per-path sup of |X_t| / envelope(t) over [T/2, T]

    Finite-horizon diagnostic only: ratios are expected to be of order one and
    to concentrate slowly as T grows.
    """

    median: float
    q10: float
    q90: float
    n: int
    ratios: np.ndarray = field(repr=False, compare=False)

    def to_dict(self) -> dict:
        return dict(median=self.median, q10=self.q10, q90=self.q90, n=self.n)


def envelope_diagnostic(
    p: Params,
    sim_cfg: SimConfig,
    n: int,
    horizon: float,
    spec: EnvelopeSpec,
    time_change: Optional[str] = None,
    smoke_bounds: Optional[Tuple[float, float]] = None,
) -> EnvelopeSummary:
    """Median, q10 and q90 of sup_{t in [T/2, T]} |X_t| / envelope(t).

    With smoke_bounds set, a median outside them emits DiagnosticWarning.
    """
    regime = classify(p)
    if regime.limsup_envelope is None and regime.liminf_envelope is None:
        raise InvalidParameters(f"regime {regime.rule} carries no envelope")
    result = run_ensemble(
        EnsembleSpec(
            params=p,
            sim_cfg=sim_cfg,
            n_paths=n,
            horizon=horizon,
            functional=Functional.ENVELOPE_SUP,
            time_change=time_change,
            envelope=spec,
        )
    )
    ratios = result.samples
    if len(ratios) == 0:
        raise EmptySample("no surviving path to summarize")
    q10, median, q90 = (float(v) for v in np.quantile(ratios, [0.1, 0.5, 0.9]))
    summary = EnvelopeSummary(median, q10, q90, len(ratios), ratios)
    if smoke_bounds is not None and not smoke_bounds[0] < median < smoke_bounds[1]:
        warnings.warn(
            f"median sup ratio {median:.4g} outside the smoke bounds {smoke_bounds}",
            DiagnosticWarning,
        )
    return summary
