import sys

import hydra
from omegaconf import DictConfig

from tidlab.build import build_experiment
from tidlab.experiments.cli import EXIT_OK, EXIT_VERIFY
from tidlab.experiments.config import load_config
from tidlab.experiments.report import write_output


@hydra.main(config_path=".", config_name="metaconfig", version_base=None)
def main(cfg: DictConfig):
    experiment_cfg = load_config(overrides=cfg)
    experiment = build_experiment(experiment_cfg)
    output = experiment.run()
    if experiment_cfg.output_path is not None:
        write_output(output, experiment_cfg.output_path, experiment_cfg.format)
    sys.exit(EXIT_VERIFY if output.passed is False else EXIT_OK)


if __name__ == "__main__":
    main()
