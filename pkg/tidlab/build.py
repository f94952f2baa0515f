import hydra
from omegaconf import DictConfig

from tidlab.common.abstract.experiment import Experiment
from tidlab.common.abstract.scheme import Scheme
from tidlab.model.params import Params
from tidlab.sde.config import SchemeKind, SimConfig

SCHEME_CLASSES = {
    SchemeKind.DIRECT_EM: "tidlab.sde.schemes.DirectEM",
    SchemeKind.SQUARED_PROCESS: "tidlab.sde.schemes.SquaredProcess",
    SchemeKind.POSITIVITY_PRESERVING: "tidlab.sde.schemes.PositivityPreserving",
    SchemeKind.ZERO_NOISE_ODE: "tidlab.sde.schemes.ZeroNoiseODE",
}

EXPERIMENT_CLASSES = {
    "classify": "tidlab.experiments.runners.ClassifyExperiment",
    "simulate": "tidlab.experiments.runners.SimulateExperiment",
    "ensemble": "tidlab.experiments.runners.EnsembleExperiment",
    "verify": "tidlab.experiments.runners.VerifyExperiment",
    "explosion": "tidlab.experiments.runners.ExplosionExperiment",
    "sweep": "tidlab.experiments.runners.SweepExperiment",
}


def build_scheme(params: Params, sim_cfg: SimConfig, kind: SchemeKind) -> Scheme:
    """Build discretization scheme via hydra.utils.instantiate()"""
    assert kind != SchemeKind.AUTO, "resolve Auto before building a scheme"
    scheme_cfg = DictConfig(dict(_target_=SCHEME_CLASSES[kind]))
    scheme = hydra.utils.instantiate(scheme_cfg, params, sim_cfg)
    return scheme


def build_experiment(experiment_cfg: DictConfig) -> Experiment:
    """Build experiment runner from DictConfig via hydra.utils.instantiate()"""
    target = experiment_cfg.get("runner") or EXPERIMENT_CLASSES[experiment_cfg.experiment]
    runner_cfg = DictConfig(dict(_target_=target))
    experiment = hydra.utils.instantiate(runner_cfg, experiment_cfg)
    return experiment
