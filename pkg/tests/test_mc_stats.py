import warnings

import numpy as np
import pytest
from scipy import stats

from tidlab.common.errors import EmptySample, HeavyTailWarning, InvalidParameters
from tidlab.model.envelope import EnvelopeKind, EnvelopeSpec
from tidlab.model.params import Params
from tidlab.sde.config import SimConfig
from tidlab.stats import estimators
from tidlab.stats.ensemble import (
    EnsembleSpec,
    Functional,
    merge_blocks,
    named_time_change,
    run_ensemble,
    worker_count,
)
from tidlab.stats.estimators import (
    CIMethod,
    EstimateWithCI,
    envelope_diagnostic,
    explosion_prob_direct,
    explosion_prob_girsanov,
    mean_interval,
    rate_check,
    wilson_interval,
)
from tidlab.stats.ks import default_threshold, ks_distance

BROWNIAN = Params(0.0, 0.0, 0.0)


def test_ks_single_sample_at_the_median():
    report = ks_distance([0.0], stats.norm.cdf)
    assert report.statistic == pytest.approx(0.5)
    assert report.n == 1


def test_ks_detects_a_wrong_variance():
    samples = np.random.default_rng(0).standard_normal(10000)
    report = ks_distance(samples, lambda x: stats.norm.cdf(x, scale=2.0))
    assert report.statistic > 0.15
    assert not report.passed


def test_ks_accepts_the_true_law():
    samples = np.random.default_rng(1).standard_normal(10000)
    report = ks_distance(samples, stats.norm.cdf)
    assert report.threshold == pytest.approx(0.0163)
    assert 0.0 <= report.statistic < 0.03


def test_ks_empty_sample():
    with pytest.raises(EmptySample):
        ks_distance([], stats.norm.cdf)
    assert default_threshold(100) == pytest.approx(0.163)


@pytest.mark.parametrize("k, n", [(0, 10), (10, 10), (3, 7), (500, 1000), (1, 1)])
def test_wilson_interval_properties(k, n):
    estimate = wilson_interval(k, n)
    assert 0.0 <= estimate.ci_low <= estimate.value <= estimate.ci_high <= 1.0
    assert estimate.value == k / n
    assert estimate.method == CIMethod.WILSON


def test_wilson_interval_empty():
    with pytest.raises(EmptySample):
        wilson_interval(0, 0)


def test_mean_interval_and_overlap():
    estimate = mean_interval(np.array([1.0, 2.0, 3.0, 4.0]))
    assert estimate.value == pytest.approx(2.5)
    half = estimators.Z_95 * np.std([1.0, 2.0, 3.0, 4.0], ddof=1) / 2.0
    assert estimate.ci_high - estimate.value == pytest.approx(half)

    other = EstimateWithCI(0.9, 0.8, 1.0, 10, CIMethod.WILSON)
    assert not estimate.overlaps(other)
    complement = other.complement()
    assert complement.value == pytest.approx(0.1)
    assert complement.ci_low == pytest.approx(0.0)
    assert complement.ci_high == pytest.approx(0.2)


def test_worker_count(monkeypatch):
    monkeypatch.delenv("TIDLAB_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("TIDLAB_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("TIDLAB_THREADS", "0")
    assert worker_count() >= 1


def test_named_time_change():
    assert named_time_change(None, BROWNIAN) is None
    assert named_time_change("exponential", BROWNIAN).is_exponential
    assert named_time_change("power", Params(1.0, 3.0, 3.0)).t1 == pytest.approx(2.0)


def test_merge_blocks_orders_by_path_index():
    blocks = [
        dict(
            path_indices=np.array([2, 3]),
            values=np.array([0.2, 0.3]),
            exploded=np.array([False, True]),
            ok=np.array([True, True]),
            failed=[],
        ),
        dict(
            path_indices=np.array([0, 1]),
            values=np.array([0.0, 0.1]),
            exploded=np.array([False, False]),
            ok=np.array([True, False]),
            failed=[(1, "NonConvergentStep: step control gave up")],
        ),
    ]
    merged = merge_blocks(blocks)
    np.testing.assert_array_equal(merged["path_indices"], [0, 1, 2, 3])
    np.testing.assert_array_equal(merged["values"], [0.0, 0.1, 0.2, 0.3])
    assert merged["failed"] == [(1, "NonConvergentStep: step control gave up")]


def test_ensemble_is_deterministic_and_split_invariant():
    spec = EnsembleSpec(
        BROWNIAN,
        SimConfig(dt=1e-2, seed=21),
        n_paths=50,
        horizon=3.0,
        functional=Functional.TERMINAL_RAW,
    )
    first = run_ensemble(spec, n_workers=1)
    second = run_ensemble(spec, n_workers=1)
    np.testing.assert_array_equal(first.samples, second.samples)
    np.testing.assert_array_equal(first.path_indices, np.arange(50))
    assert first.n_survivors == 50

    smaller = run_ensemble(
        EnsembleSpec(
            BROWNIAN,
            SimConfig(dt=1e-2, seed=21),
            n_paths=20,
            horizon=3.0,
            functional=Functional.TERMINAL_RAW,
        ),
        n_workers=1,
    )
    np.testing.assert_array_equal(smaller.samples, first.samples[:20])


def test_ensemble_functional_coercion_and_checks():
    spec = EnsembleSpec(BROWNIAN, SimConfig(), 10, 2.0, functional="ExplosionIndicator")
    assert spec.functional == Functional.EXPLOSION_INDICATOR
    with pytest.raises(InvalidParameters):
        EnsembleSpec(BROWNIAN, SimConfig(), 10, 2.0, functional=Functional.GIRSANOV_WEIGHT)
    with pytest.raises(AssertionError):
        EnsembleSpec(BROWNIAN, SimConfig(), 10, 2.0, functional=Functional.ENVELOPE_SUP)
    with pytest.raises(AssertionError):
        EnsembleSpec(BROWNIAN, SimConfig(), 10, 1.0)


def test_terminal_normalized_uses_the_regime_normalization():
    raw = run_ensemble(
        EnsembleSpec(BROWNIAN, SimConfig(dt=1e-2, seed=2), 30, 4.0, Functional.TERMINAL_RAW)
    )
    normalized = run_ensemble(EnsembleSpec(BROWNIAN, SimConfig(dt=1e-2, seed=2), 30, 4.0))
    np.testing.assert_allclose(normalized.samples, raw.samples / 2.0)


def test_explosion_indicator_keeps_every_path():
    result = run_ensemble(
        EnsembleSpec(
            Params(1.0, 3.0, 0.0),
            SimConfig(dt=1e-2, seed=4),
            40,
            20.0,
            Functional.EXPLOSION_INDICATOR,
        )
    )
    assert len(result) == 40
    assert result.n_exploded == int(result.samples.sum())
    assert result.samples.mean() >= 0.9


def test_doubling_the_envelope_constant_halves_the_ratios():
    cfg = SimConfig(dt=1e-2, seed=5)
    plain = EnvelopeSpec(EnvelopeKind.L)
    doubled = EnvelopeSpec(EnvelopeKind.SCALED_L, 2.0)
    first = envelope_diagnostic(BROWNIAN, cfg, 20, 30.0, plain)
    second = envelope_diagnostic(BROWNIAN, cfg, 20, 30.0, doubled)
    np.testing.assert_allclose(second.ratios, first.ratios / 2.0)
    assert second.median == pytest.approx(first.median / 2.0)
    assert first.q10 <= first.median <= first.q90


def test_envelope_diagnostic_needs_an_envelope():
    with pytest.raises(InvalidParameters):
        envelope_diagnostic(
            Params(1.0, 0.0, 0.0), SimConfig(), 10, 10.0, EnvelopeSpec(EnvelopeKind.L)
        )


def test_non_explosive_direct_estimate_is_zero():
    estimate = explosion_prob_direct(Params(-1.0, 2.0, 0.0), SimConfig(), 100, 1e6)
    assert estimate.value == 0.0
    assert estimate.ci_low == 0.0
    assert estimate.doubling_delta == 0.0
    with pytest.raises(InvalidParameters):
        explosion_prob_direct(Params(-1.0, -2.0, 0.0), SimConfig(), 100, 10.0)


def test_girsanov_estimate_for_vanishing_drift():
    p = Params(1e-6, 3.0, 3.0)
    estimate = explosion_prob_girsanov(p, SimConfig(dt=1e-2, seed=3), 200, eps_cut=1e-3)
    assert estimate.value == pytest.approx(1.0, abs=1e-3)
    assert estimate.ci_low - 1e-3 <= 1.0 <= estimate.ci_high + 1e-3
    assert estimate.reliable


def test_heavy_tailed_weights_are_flagged(monkeypatch):
    weights = np.ones(1000)
    weights[0] = 1e6

    monkeypatch.setattr(estimators, "girsanov_weights", lambda *args, **kwargs: weights)
    with pytest.warns(HeavyTailWarning):
        estimate = explosion_prob_girsanov(Params(1.0, 3.0, 3.0), SimConfig(), 1000)
    assert not estimate.reliable

    spread = np.arange(1.0, 11.0)
    monkeypatch.setattr(estimators, "girsanov_weights", lambda *args, **kwargs: spread)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert explosion_prob_girsanov(Params(1.0, 3.0, 3.0), SimConfig(), 10).reliable


def test_rate_check_rejects_recurrent_regimes():
    with pytest.raises(InvalidParameters):
        rate_check(Params(-1.0, 1.0, 1.0), SimConfig(), 10, 10.0)


def test_rate_check_small_run():
    result = rate_check(Params(1.0, 0.0, 0.0), SimConfig(dt=1e-2, seed=1), 20, 200.0)
    assert result.predicted == 1.0
    assert result.estimate.n == 20
    assert result.estimate.value == pytest.approx(1.0, abs=0.2)
