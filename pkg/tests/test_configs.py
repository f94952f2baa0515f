import os

from hydra import compose, initialize
import pytest

from tidlab.build import build_experiment
from tidlab.common.errors import ConfigError
from tidlab.experiments.config import load_config, to_params, to_sim_config
from tidlab.experiments.runners import (
    SimulateExperiment,
    SweepExperiment,
    VerifyExperiment,
)
from tidlab.model.params import ValidityClass, validate

PRESET_DIR = os.path.join(os.path.dirname(__file__), "..", "configs", "preset")
PRESETS = sorted(name[: -len(".yaml")] for name in os.listdir(PRESET_DIR))


def test_metaconfig_defaults_to_the_brownian_preset():
    with initialize(config_path="..", version_base=None):
        cfg = compose(config_name="metaconfig")
    assert cfg.experiment == "verify"
    assert cfg.normalization == "sqrt_elapsed"


@pytest.mark.parametrize("name", PRESETS)
def test_preset_builds(compose_preset, name):
    cfg = compose_preset(name)
    experiment = build_experiment(cfg)
    assert experiment.experiment_cfg.experiment == cfg.experiment
    if cfg.experiment == "sweep":
        assert isinstance(experiment, SweepExperiment)
        return
    assert validate(to_params(cfg)) != ValidityClass.INVALID
    to_sim_config(cfg)
    expected = VerifyExperiment if cfg.experiment == "verify" else SimulateExperiment
    assert isinstance(experiment, expected)


def test_sweep_preset_runs(compose_preset):
    output = build_experiment(compose_preset("phase_diagram_sweep")).run()
    assert len(output.rows) == 27
    assert output.passed is None


def test_zero_noise_preset_runs(compose_preset):
    output = build_experiment(compose_preset("zero_noise_blowup")).run()
    assert output.payload["report"]["exploded"]
    assert output.payload["report"]["tau_e_estimate"] == pytest.approx(1.5, abs=1e-3)


def test_load_config_precedence(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("experiment: ensemble\nrho: 1.0\nn_paths: 10\n")
    cfg = load_config(str(path), dict(rho=-1.0))
    assert cfg.experiment == "ensemble"
    assert cfg.rho == -1.0
    assert cfg.n_paths == 10
    assert cfg.dt == 1e-3


@pytest.mark.parametrize(
    "overrides",
    [
        dict(experiment="train"),
        dict(format="xml"),
        dict(time_change="logarithmic"),
        dict(n_paths=0),
        dict(horizon=1.0),
        dict(normalization="exp_power"),
        dict(experiment="sweep", rho_list=[1.0]),
        dict(rho="abc"),
        dict(unknown_key=1),
    ],
)
def test_invalid_configs(overrides):
    with pytest.raises(ConfigError):
        load_config(overrides=overrides)


def test_runner_override():
    cfg = load_config(
        overrides=dict(experiment="classify", runner="tidlab.experiments.runners.SweepExperiment")
    )
    assert isinstance(build_experiment(cfg), SweepExperiment)
