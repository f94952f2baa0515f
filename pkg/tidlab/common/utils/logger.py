from datetime import datetime

from omegaconf import DictConfig, OmegaConf
import wandb


class Logger:
    """WandB run of one experiment, grouped by experiment kind

    Attributes:
        experiment_cfg (DictConfig): full experiment configuration
        run_name (str): parameter triple and date

    """

    def __init__(self, experiment_cfg: DictConfig):
        self.experiment_cfg = experiment_cfg
        cfg = experiment_cfg
        self.run_name = (
            f"rho={cfg.rho},alpha={cfg.alpha},beta={cfg.beta}/{datetime.now():%Y-%m-%d}"
        )
        wandb.init(
            project="tidlab",
            group=cfg.experiment,
            name=self.run_name,
            config=OmegaConf.to_container(cfg, resolve=True),
        )

    def write_log(self, log_dict: dict, step: int = None):
        """Write to WandB log; None entries (empty CSV cells) are dropped"""
        wandb.log({key: value for key, value in log_dict.items() if value is not None}, step=step)

    def write_summary(self, summary: dict):
        for key, value in summary.items():
            wandb.run.summary[key] = value
