from hydra import compose, initialize
import pytest

from tidlab.experiments.config import load_config


@pytest.fixture
def compose_preset():
    """Experiment config of a preset, composed the way run_experiment.py composes it"""

    def _compose(name: str):
        with initialize(config_path="..", version_base=None):
            cfg = compose(config_name="metaconfig", overrides=[f"configs/preset={name}"])
        return load_config(overrides=cfg)

    return _compose
