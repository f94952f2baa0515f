import numpy as np
import pytest

from tidlab.common.errors import InvalidParameters, OutOfDomain
from tidlab.model.params import Params
from tidlab.sde.bridge import (
    bridge_exponent,
    bridge_weights,
    check_bridge_region,
    default_eps_cut,
    simulate_bridge_functional,
)
from tidlab.sde.config import SchemeKind, SimConfig
from tidlab.sde.engine import (
    check_simulation_inputs,
    make_integrator,
    resolve_scheme_kind,
    scheme_for,
    simulate,
    simulate_transformed,
)
from tidlab.sde.schemes import DirectEM, PositivityPreserving, SquaredProcess, ZeroNoiseODE
from tidlab.time_change.time_change import make_exponential, make_power


@pytest.mark.parametrize(
    "alpha, rho, kind",
    [
        (2.0, 1.0, SchemeKind.DIRECT_EM),
        (-0.5, -1.0, SchemeKind.DIRECT_EM),
        (-1.0, 1.0, SchemeKind.SQUARED_PROCESS),
        (-2.0, 1.0, SchemeKind.POSITIVITY_PRESERVING),
        (-2.0, 0.0, SchemeKind.DIRECT_EM),
    ],
)
def test_auto_dispatch(alpha, rho, kind):
    assert resolve_scheme_kind(Params(rho, alpha, 0.0), SimConfig()) == kind


def test_scheme_instances():
    assert isinstance(scheme_for(Params(1.0, 3.0, 0.0), SimConfig()), DirectEM)
    assert isinstance(scheme_for(Params(1.0, -1.0, 0.0), SimConfig()), SquaredProcess)
    assert isinstance(scheme_for(Params(1.0, -3.0, 0.0), SimConfig()), PositivityPreserving)
    zero_noise = SimConfig(scheme="ZeroNoiseODE")
    assert isinstance(scheme_for(Params(1.0, 3.0, 0.0), zero_noise), ZeroNoiseODE)


def test_simulation_input_checks():
    with pytest.raises(InvalidParameters):
        check_simulation_inputs(Params(-1.0, -2.0, 0.0), SimConfig())
    with pytest.raises(InvalidParameters):
        check_simulation_inputs(Params(1.0, 0.0, 0.0, x0=5.0), SimConfig(explosion_threshold=2.0))
    with pytest.raises(InvalidParameters):
        check_simulation_inputs(Params(1.0, 0.0, 0.0), SimConfig(scheme="SquaredProcess"))
    with pytest.raises(InvalidParameters):
        simulate(Params(0.0, 0.0, 0.0), SimConfig(), horizon=1.0)
    with pytest.raises(OutOfDomain):
        simulate_transformed(Params(1.0, 3.0, 3.0), make_power(3.0, 3.0), SimConfig(), 2.0)


def test_brownian_increments_have_unit_variance():
    integrator = make_integrator(Params(0.0, 0.0, 0.0), SimConfig(dt=1e-2, seed=11))
    result = integrator.run(np.arange(10000), 2.0)
    np.testing.assert_allclose(result.terminal_time, 2.0)
    assert np.var(result.terminal_value, ddof=1) == pytest.approx(1.0, rel=0.05)
    assert not result.exploded.any()


def test_rows_do_not_depend_on_their_batch():
    p = Params(-0.5, 1.0, 0.5, x0=0.3)
    cfg = SimConfig(dt=1e-2, seed=5)
    batch = make_integrator(p, cfg).run(np.arange(10), 3.0)
    alone = make_integrator(p, cfg).run([3, 7], 3.0)
    assert batch.terminal_value[3] == alone.terminal_value[0]
    assert batch.terminal_value[7] == alone.terminal_value[1]


def test_simulate_stores_the_full_path():
    cfg = SimConfig(dt=0.25, store_full_path=True, seed=2)
    path, report = simulate(Params(0.3, 0.5, 1.0), cfg, horizon=3.0)
    assert path.t_start == 1.0
    assert path.times[0] == 1.0
    assert path.terminal_time == 3.0
    assert len(path) == 9
    assert not report.exploded
    assert report.tau_e_estimate is None

    thinned, _ = simulate(
        Params(0.3, 0.5, 1.0),
        SimConfig(dt=0.25, store_full_path=True, seed=2, record_every=4),
        horizon=3.0,
    )
    assert len(thinned) == 3
    assert thinned.terminal_value == path.terminal_value


def test_simulate_without_storage_keeps_end_points():
    path, _ = simulate(Params(0.0, 0.0, 0.0), SimConfig(dt=0.25), horizon=2.0)
    assert len(path) == 2
    assert path.terminal_time == 2.0


def test_zero_noise_blowup_time():
    cfg = SimConfig(scheme="ZeroNoiseODE")
    path, report = simulate(Params(1.0, 3.0, 0.0, x0=1.0), cfg, horizon=10.0)
    assert report.exploded
    assert report.tau_e_estimate == pytest.approx(1.5, abs=1e-3)
    assert path.killed
    assert path.terminal_time < 1.5


def test_zero_noise_batch_is_deterministic_euler():
    p = Params(-1.0, 1.0, 0.0, x0=1.0)
    cfg = SimConfig(scheme="ZeroNoiseODE", dt=1e-3)
    result = make_integrator(p, cfg).run([0, 1], 2.0)
    assert result.terminal_value[0] == result.terminal_value[1]
    assert result.terminal_value[0] == pytest.approx(np.exp(-1.0), rel=1e-2)


def test_explosive_batch_detects_blowup():
    p = Params(1.0, 3.0, 0.0)
    result = make_integrator(p, SimConfig(dt=1e-2, seed=3)).run(np.arange(64), 20.0)
    assert result.exploded.mean() >= 0.9
    exploded = result.exploded
    assert np.all(result.tau_e[exploded] >= result.crossing_time[exploded])
    assert np.all(result.tau_e[exploded] <= 20.0)
    assert np.all(np.abs(result.terminal_value[exploded]) >= 1e8)
    assert np.all(np.isnan(result.tau_e[~exploded]))


def test_bessel_scheme_stays_nonnegative():
    p = Params(1.0, -1.0, 0.0)
    result = make_integrator(p, SimConfig(dt=1e-2, seed=4)).run(np.arange(500), 10.0)
    assert np.all(result.terminal_value >= 0.0)
    # E[X_T^2] = (2 rho + 1)(T - 1) for the squared process started at 0
    assert np.mean(result.terminal_value ** 2) == pytest.approx(27.0, rel=0.15)


def test_positivity_preserving_scheme_stays_positive():
    p = Params(1.0, -2.0, 0.0)
    result = make_integrator(p, SimConfig(dt=1e-2, seed=8)).run(np.arange(200), 5.0)
    assert np.all(result.terminal_value > 0.0)
    assert not result.nonconvergent.any()


def test_clamped_drift_near_singularity():
    p = Params(-1.0, -0.5, 0.0)
    result = make_integrator(p, SimConfig(dt=1e-2, seed=9)).run(np.arange(200), 5.0)
    assert np.all(np.isfinite(result.terminal_value))


def test_transformed_ornstein_uhlenbeck_variance():
    integrator = make_integrator(
        Params(0.0, 0.0, 0.0), SimConfig(dt=1e-2, seed=6), make_exponential(), False
    )
    result = integrator.run(np.arange(4000), 5.0)
    np.testing.assert_allclose(result.terminal_time, 5.0)
    assert np.var(result.terminal_value) == pytest.approx(1.0 - np.exp(-5.0), rel=0.08)


def test_simulate_transformed_starts_at_zero():
    path = simulate_transformed(
        Params(-1.0, 1.0, 1.0, x0=0.5), make_power(1.0, 1.0), SimConfig(dt=0.25), 1.0
    )
    assert path.t_start == 0.0
    assert path.times[0] == 0.0
    assert path.terminal_time == 1.0


def test_bridge_region():
    check_bridge_region(Params(1.0, 3.0, 3.0))
    for p in (Params(1.0, 3.0, 2.0), Params(-1.0, 3.0, 3.0), Params(1.0, 1.0, 3.0)):
        with pytest.raises(InvalidParameters):
            check_bridge_region(p)
    assert default_eps_cut(Params(1.0, 3.0, 3.0)) == pytest.approx(2e-4)


def test_bridge_with_zero_increments_has_unit_weight():
    p = Params(1.0, 3.0, 3.0)
    exponent, b = bridge_exponent(
        p, SimConfig(dt=1e-2), 1e-3, 4, lambda rows: np.zeros(len(rows))
    )
    np.testing.assert_array_equal(exponent, 0.0)
    np.testing.assert_array_equal(b, 0.0)


def test_bridge_shrinks_to_zero():
    p = Params(1.0, 3.0, 3.0, x0=1.0)
    _, b = bridge_exponent(p, SimConfig(dt=1e-2), 1e-6, 1, lambda rows: np.zeros(len(rows)))
    assert abs(b[0]) < 1e-3


def test_bridge_weights_vanishing_drift():
    weights = bridge_weights(Params(1e-9, 3.0, 3.0), SimConfig(dt=1e-2), 1e-3, np.arange(50))
    np.testing.assert_allclose(weights, 1.0, atol=1e-6)


def test_bridge_weights_are_positive_and_reproducible():
    p = Params(1.0, 3.0, 3.0)
    cfg = SimConfig(dt=1e-2, seed=12)
    weights = bridge_weights(p, cfg, 1e-3, np.arange(20))
    assert np.all(weights >= 0.0)
    assert simulate_bridge_functional(p, cfg, 1e-3, path_index=7) == weights[7]
