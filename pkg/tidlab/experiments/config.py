from dataclasses import dataclass, field
from typing import List, Optional

from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from tidlab.common.errors import ConfigError
from tidlab.model.params import Params
from tidlab.model.regime import NormalizationSpec, NormKind
from tidlab.sde.config import SimConfig

EXPERIMENTS = ("classify", "simulate", "ensemble", "verify", "explosion", "sweep")
FORMATS = ("csv", "json")
TIME_CHANGES = (None, "power", "exponential")

# Normalizations a config may name directly; the others carry exponents
NAMED_NORMALIZATIONS = (NormKind.SQRT_T, NormKind.SQRT_ELAPSED, NormKind.NONE)


@dataclass
class ExperimentConfig:
    """Flat experiment configuration; file keys and command-line flags share these names

    Attributes:
        experiment (str): classify, simulate, ensemble, verify, explosion or sweep
        rho, alpha, beta, x0 (float): model parameters
        n_paths (int): ensemble size
        horizon (float): final original time
        dt, adapt, explosion_threshold, scheme, seed, store_full_path, rel_step,
            record_every: SimConfig fields
        functional (str): ensemble functional
        time_change (str): simulate ensembles in transformed time (power or exponential)
        normalization (str): n(t) override for TerminalNormalized (sqrt_t, sqrt_elapsed, none)
        ks_tolerance (float): absolute KS threshold, 1.63 / sqrt(n) if None
        rate_tolerance (float): relative band around ell for the rate check
        explosion_min_fraction (float): required exploded fraction when explosion is a.s.
        eps_cut (float): bridge tail cut, t1 * 1e-4 if None
        envelope_check (bool): run the envelope diagnostic in verify
        envelope_horizon (float): horizon of the envelope diagnostic, horizon if None
        smoke_low, smoke_high (float): smoke bounds of the envelope diagnostic
        rho_list, alpha_list, beta_list (list): sweep grid
        quick_verify (bool): add a quick verify statistic to every sweep row
        quick_n_paths (int): ensemble size of the quick verify
        output_path (str): result file, nothing is written if None
        format (str): csv or json
        log_wandb (bool): log to Weights & Biases
        runner (str): class path overriding the runner chosen by experiment

    """

    experiment: str = "classify"
    rho: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    x0: float = 0.0

    n_paths: int = 1000
    horizon: float = 10.0

    dt: float = 1e-3
    adapt: bool = True
    explosion_threshold: float = 1e8
    scheme: str = "Auto"
    seed: int = 0
    store_full_path: bool = False
    rel_step: float = 0.05
    record_every: int = 1

    functional: str = "TerminalNormalized"
    time_change: Optional[str] = None
    normalization: Optional[str] = None

    ks_tolerance: Optional[float] = None
    rate_tolerance: float = 0.05
    explosion_min_fraction: float = 0.99
    eps_cut: Optional[float] = None
    envelope_check: bool = True
    envelope_horizon: Optional[float] = None
    smoke_low: float = 0.2
    smoke_high: float = 1.2

    rho_list: List[float] = field(default_factory=list)
    alpha_list: List[float] = field(default_factory=list)
    beta_list: List[float] = field(default_factory=list)
    quick_verify: bool = False
    quick_n_paths: int = 500

    output_path: Optional[str] = None
    format: str = "json"
    log_wandb: bool = False
    runner: Optional[str] = None


def validate_config(cfg: DictConfig):
    """Raise ConfigError on inconsistent settings"""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}, expected one of {EXPERIMENTS}")
    if cfg.format not in FORMATS:
        raise ConfigError(f"unknown format {cfg.format!r}, expected one of {FORMATS}")
    if cfg.time_change not in TIME_CHANGES:
        raise ConfigError(f"unknown change of time {cfg.time_change!r}")
    if cfg.n_paths < 1:
        raise ConfigError("n_paths must be positive")
    if not cfg.horizon > 1:
        raise ConfigError(f"horizon must exceed 1, got {cfg.horizon}")
    if cfg.normalization is not None and cfg.normalization not in [
        kind.value for kind in NAMED_NORMALIZATIONS
    ]:
        raise ConfigError(f"normalization {cfg.normalization!r} cannot be set by name")
    if cfg.experiment == "sweep":
        for key in ("rho_list", "alpha_list", "beta_list"):
            if len(cfg[key]) == 0:
                raise ConfigError(f"sweep needs a nonempty {key}")


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> DictConfig:
    """Merge defaults, then the file at path, then overrides (CLI > file > defaults)"""
    cfg = OmegaConf.structured(ExperimentConfig)
    layers = [cfg]
    try:
        if path is not None:
            layers.append(OmegaConf.load(path))
        if overrides:
            layers.append(OmegaConf.create(overrides))
        cfg = OmegaConf.merge(*layers)
    except OmegaConfBaseException as error:
        raise ConfigError(str(error)) from error
    validate_config(cfg)
    return cfg


def to_params(cfg: DictConfig) -> Params:
    return Params(rho=cfg.rho, alpha=cfg.alpha, beta=cfg.beta, x0=cfg.x0)


def to_sim_config(cfg: DictConfig) -> SimConfig:
    return SimConfig(
        dt=cfg.dt,
        adapt=cfg.adapt,
        explosion_threshold=cfg.explosion_threshold,
        scheme=cfg.scheme,
        seed=cfg.seed,
        store_full_path=cfg.store_full_path,
        rel_step=cfg.rel_step,
        record_every=cfg.record_every,
    )


def to_normalization(cfg: DictConfig) -> Optional[NormalizationSpec]:
    if cfg.normalization is None:
        return None
    return NormalizationSpec(NormKind(cfg.normalization))
