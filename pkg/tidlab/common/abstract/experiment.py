from abc import ABC, abstractmethod
from typing import Any

from omegaconf import DictConfig

from tidlab.common.utils.logger import Logger


class Experiment(ABC):
    """Abstract base class for experiment runners.

    Attributes:
        experiment_cfg (DictConfig): merged experiment configuration
        logger (Logger): WandB logger, None unless log_wandb is set

    """

    def __init__(self, experiment_cfg: DictConfig):
        self.experiment_cfg = experiment_cfg
        self.logger = None
        if self.experiment_cfg.get("log_wandb", False):
            self.logger = Logger(experiment_cfg)

    @abstractmethod
    def run(self) -> Any:
        pass

    def write_log(self, log_dict: dict, step: int = None):
        """Forward to the WandB logger when enabled"""
        if self.logger is not None:
            self.logger.write_log(log_dict, step)

    def write_summary(self, summary: dict):
        if self.logger is not None:
            self.logger.write_summary(summary)
