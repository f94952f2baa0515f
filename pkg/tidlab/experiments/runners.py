import itertools
import json
import time
from typing import List

import numpy as np
from omegaconf import DictConfig, OmegaConf

from tidlab.common.abstract.experiment import Experiment
from tidlab.common.errors import ConfigError, TidlabError
from tidlab.experiments.config import to_normalization, to_params, to_sim_config
from tidlab.experiments.report import SWEEP_HEADER, CheckResult, RunOutput, VerifyReport
from tidlab.laws.densities import law_cdf
from tidlab.laws.descriptor import LawKind
from tidlab.laws.packages import limit_package
from tidlab.model.params import Params, ValidityClass, validate
from tidlab.model.regime import Recurrence, Regime, classify
from tidlab.sde.bridge import check_bridge_region
from tidlab.sde.config import SimConfig
from tidlab.sde.engine import simulate, simulate_transformed
from tidlab.stats.ensemble import EnsembleSpec, Functional, named_time_change, run_ensemble
from tidlab.stats.estimators import (
    envelope_diagnostic,
    explosion_prob_direct,
    explosion_prob_girsanov,
    rate_check,
)
from tidlab.stats.ks import ks_distance

# Laws with a continuous CDF, tested by KS
KS_LAWS = (
    LawKind.GAUSSIAN,
    LawKind.HALF_GAUSSIAN,
    LawKind.SQRT_GAMMA,
    LawKind.LAMBDA,
    LawKind.PI,
)


def regime_checks(
    cfg: DictConfig, p: Params, sim_cfg: SimConfig, regime: Regime, n_paths: int
) -> List[CheckResult]:
    """Check bundle of a regime: explosion estimators in explosive regimes,
    otherwise the limit-law KS test or the deterministic rate check."""
    if regime.recurrence == Recurrence.EXPLODES_AS:
        estimate = explosion_prob_direct(p, sim_cfg, n_paths, cfg.horizon)
        print(f"[VERIFY] exploded fraction doubling delta: {estimate.doubling_delta:.6g}")
        return [
            CheckResult(
                "explosion-fraction",
                1.0,
                estimate.value,
                cfg.explosion_min_fraction,
                estimate.value >= cfg.explosion_min_fraction,
            )
        ]

    if regime.recurrence == Recurrence.EXPLODES_WITH_PARTIAL_PROBABILITY:
        survival = explosion_prob_girsanov(p, sim_cfg, n_paths, cfg.eps_cut)
        direct = explosion_prob_direct(p, sim_cfg, n_paths, cfg.horizon).complement()
        print(
            f"[VERIFY] girsanov: {survival.value:.6g} [{survival.ci_low:.6g}, "
            f"{survival.ci_high:.6g}] | 1 - direct: {direct.value:.6g} "
            f"[{direct.ci_low:.6g}, {direct.ci_high:.6g}] "
            f"| doubling delta: {-direct.doubling_delta:.6g}"
        )
        inside = all(0.0 < est.value < 1.0 for est in (survival, direct))
        half_widths = (survival.ci_high - survival.ci_low + direct.ci_high - direct.ci_low) / 2
        return [
            CheckResult(
                "explosion-identity",
                0.0,
                abs(survival.value - direct.value),
                half_widths,
                survival.overlaps(direct) and inside,
            )
        ]

    law = regime.limit_law
    if law.kind == LawKind.DETERMINISTIC:
        result = rate_check(p, sim_cfg, n_paths, cfg.horizon, cfg.time_change)
        band = cfg.rate_tolerance * result.predicted
        return [
            CheckResult(
                "deterministic-rate",
                result.predicted,
                result.estimate.value,
                band,
                abs(result.estimate.value - result.predicted) <= band,
            )
        ]

    if law.kind not in KS_LAWS:
        return []
    normalization = to_normalization(cfg) or regime.normalization
    ensemble = run_ensemble(
        EnsembleSpec(
            params=p,
            sim_cfg=sim_cfg,
            n_paths=n_paths,
            horizon=cfg.horizon,
            functional=Functional.TERMINAL_NORMALIZED,
            time_change=cfg.time_change,
            normalization=normalization,
        )
    )
    report = ks_distance(ensemble.samples, lambda x: law_cdf(law, x), cfg.ks_tolerance)
    return [
        CheckResult(
            f"limit-law-ks X_T/{normalization}",
            str(law),
            report.statistic,
            report.threshold,
            report.passed,
        )
    ]


def _config_dict(cfg: DictConfig) -> dict:
    return OmegaConf.to_container(cfg, resolve=True)


class ClassifyExperiment(Experiment):
    """Print the phase-diagram verdict of one parameter triple"""

    def run(self) -> RunOutput:
        p = to_params(self.experiment_cfg)
        regime = classify(p)
        lines = [
            f"validity: {regime.validity.value}",
            f"recurrence: {regime.recurrence.value}",
            f"normalization: {regime.normalization}",
            f"limit law: {regime.limit_law if regime.limit_law is not None else 'none'}",
            f"limsup envelope: {regime.limsup_envelope or 'none'}",
            f"liminf envelope: {regime.liminf_envelope or 'none'}",
            f"rule: {regime.rule} ({regime.reference})",
        ]
        if regime.notes:
            lines.append(f"notes: {', '.join(regime.notes)}")
        print("\n".join(lines))

        payload = dict(params=p.to_dict(), regime=regime.to_dict())
        print(json.dumps(payload))
        return RunOutput(payload, list(SWEEP_HEADER), [_regime_row(p, regime)])


class SimulateExperiment(Experiment):
    """Simulate one path, in original time or in transformed time"""

    def run(self) -> RunOutput:
        cfg = self.experiment_cfg
        p, sim_cfg = to_params(cfg), to_sim_config(cfg)
        payload = dict(params=p.to_dict(), seed=cfg.seed)
        tc = named_time_change(cfg.time_change, p)
        if tc is None:
            path, report = simulate(p, sim_cfg, cfg.horizon)
            payload["report"] = dict(
                exploded=report.exploded,
                tau_e_estimate=report.tau_e_estimate,
                last_value=report.last_value,
                censored_at=report.censored_at,
                threshold_crossing_time=report.threshold_crossing_time,
                nonconvergent=report.nonconvergent,
            )
            print(
                f"[SIMULATE] exploded: {report.exploded} | tau_e: {report.tau_e_estimate} "
                f"| last value: {report.last_value:.6g}"
            )
        else:
            path = simulate_transformed(p, tc, sim_cfg, float(tc.inverse(cfg.horizon)))
            payload["time_change"] = cfg.time_change
            print(f"[SIMULATE] transformed path with {len(path)} points")
        payload["times"] = path.times
        payload["values"] = path.values
        payload["killing_time"] = path.killing_time
        rows = [[t, x] for t, x in zip(path.times, path.values)]
        return RunOutput(payload, ["t", "x"], rows)


class EnsembleExperiment(Experiment):
    """Run one ensemble and report its samples"""

    def run(self) -> RunOutput:
        cfg = self.experiment_cfg
        p, sim_cfg = to_params(cfg), to_sim_config(cfg)
        functional = Functional(cfg.functional)
        envelope = None
        if functional == Functional.ENVELOPE_SUP:
            regime = classify(p)
            envelope = regime.limsup_envelope or regime.liminf_envelope
            if envelope is None:
                raise ConfigError(f"regime {regime.rule} carries no envelope")
        spec = EnsembleSpec(
            params=p,
            sim_cfg=sim_cfg,
            n_paths=cfg.n_paths,
            horizon=cfg.horizon,
            functional=functional,
            time_change=cfg.time_change,
            normalization=to_normalization(cfg),
            envelope=envelope,
            eps_cut=cfg.eps_cut,
        )
        result = run_ensemble(spec)
        finite = result.samples[np.isfinite(result.samples)]
        summary = dict(
            n_paths=cfg.n_paths,
            n_samples=len(result),
            n_survivors=result.n_survivors,
            n_exploded=result.n_exploded,
            n_failed=len(result.failed),
            mean=float(np.mean(finite)) if len(finite) else None,
        )
        print(
            f"[ENSEMBLE] functional: {functional.value} | samples: {len(result)} "
            f"| survivors: {result.n_survivors} | exploded: {result.n_exploded} "
            f"| failed: {len(result.failed)}"
        )
        self.write_summary(summary)
        payload = dict(
            config=_config_dict(cfg),
            summary=summary,
            path_indices=result.path_indices,
            samples=result.samples,
            failed=[dict(path_index=i, error=message) for i, message in result.failed],
        )
        rows = [[int(i), v] for i, v in zip(result.path_indices, result.samples)]
        return RunOutput(payload, ["path_index", "value"], rows)


class VerifyExperiment(Experiment):
    """Run the check bundle of the configured regime"""

    def run(self) -> RunOutput:
        cfg = self.experiment_cfg
        start = time.time()
        p, sim_cfg = to_params(cfg), to_sim_config(cfg)
        regime = classify(p)
        report = VerifyReport(regime.to_dict(), seed=cfg.seed, config=_config_dict(cfg))

        print("====VERIFY START====")
        print(
            f"[VERIFY] rule: {regime.rule} ({regime.reference})"
            f" | recurrence: {regime.recurrence.value}"
        )
        try:
            checks = regime_checks(cfg, p, sim_cfg, regime, cfg.n_paths)
        except TidlabError as error:
            name = f"error {type(error).__name__}: {error}"
            checks = [CheckResult(name, "", np.nan, np.nan, False)]
        for check in checks:
            report.checks.append(check)
            print(f"[VERIFY] {check}")
            self.write_log({check.name: check.observed, f"{check.name}/pass": check.passed})

        if cfg.envelope_check and regime.limsup_envelope is not None:
            diagnostic = self._envelope_diagnostic(p, sim_cfg, regime)
            report.diagnostics.append(diagnostic)
            print(f"[VERIFY] diagnostic {diagnostic}")

        report.wall_time = time.time() - start
        self.write_summary(dict(passed=report.passed, wall_time=report.wall_time))
        print(f"[VERIFY] pass: {report.passed} | wall time: {report.wall_time:.2f}s")
        print("====VERIFY END====")
        return RunOutput(report.to_dict(), *report.table(), passed=report.passed)

    def _envelope_diagnostic(self, p: Params, sim_cfg: SimConfig, regime: Regime) -> CheckResult:
        cfg = self.experiment_cfg
        bounds = (cfg.smoke_low, cfg.smoke_high)
        summary = envelope_diagnostic(
            p,
            sim_cfg,
            cfg.n_paths,
            cfg.envelope_horizon or cfg.horizon,
            regime.limsup_envelope,
            cfg.time_change,
            bounds,
        )
        return CheckResult(
            f"envelope-sup-ratio median (q10 {summary.q10:.4g}, q90 {summary.q90:.4g})",
            f"({bounds[0]:g}, {bounds[1]:g})",
            summary.median,
            bounds[1] - bounds[0],
            bounds[0] < summary.median < bounds[1],
        )


class ExplosionExperiment(Experiment):
    """Both explosion-probability estimators where they apply"""

    def run(self) -> RunOutput:
        cfg = self.experiment_cfg
        p, sim_cfg = to_params(cfg), to_sim_config(cfg)
        estimates = dict(direct=explosion_prob_direct(p, sim_cfg, cfg.n_paths, cfg.horizon))
        try:
            check_bridge_region(p)
        except TidlabError as error:
            print(f"[EXPLOSION] girsanov_survival skipped: {error}")
            self.write_log({"girsanov_survival/skipped": str(error)})
        else:
            estimates["girsanov_survival"] = explosion_prob_girsanov(
                p, sim_cfg, cfg.n_paths, cfg.eps_cut
            )

        header = ["estimator", "value", "ci_low", "ci_high", "n", "reliable", "doubling_delta"]
        rows = []
        for name, estimate in estimates.items():
            print(
                f"[EXPLOSION] {name}: {estimate.value:.6g} "
                f"[{estimate.ci_low:.6g}, {estimate.ci_high:.6g}] | n: {estimate.n}"
            )
            rows.append(
                [
                    name,
                    estimate.value,
                    estimate.ci_low,
                    estimate.ci_high,
                    estimate.n,
                    estimate.reliable,
                    estimate.doubling_delta,
                ]
            )
            self.write_log({f"{name}/value": estimate.value})
        payload = dict(
            config=_config_dict(cfg),
            estimates={name: estimate.to_dict() for name, estimate in estimates.items()},
        )
        return RunOutput(payload, header, rows)


def _regime_row(p: Params, regime: Regime) -> list:
    envelope = regime.limsup_envelope or regime.liminf_envelope
    law = regime.limit_law
    if regime.recurrence == Recurrence.EXPLODES_WITH_PARTIAL_PROBABILITY:
        _, law = limit_package(regime, p)
    return [
        p.rho,
        p.alpha,
        p.beta,
        regime.validity.value,
        regime.recurrence.value,
        str(regime.normalization),
        "" if law is None else str(law),
        "" if envelope is None else str(envelope),
        None,
        None,
        None,
    ]


class SweepExperiment(Experiment):
    """Classify every cell of a (rho, alpha, beta) grid, optionally with a quick verify"""

    def run(self) -> RunOutput:
        cfg = self.experiment_cfg
        rows = []
        grid = itertools.product(cfg.rho_list, cfg.alpha_list, cfg.beta_list)
        for step, (rho, alpha, beta) in enumerate(grid):
            row = self._cell(float(rho), float(alpha), float(beta))
            rows.append(row)
            print(
                f"[SWEEP] rho: {rho} | alpha: {alpha} | beta: {beta} "
                f"| recurrence: {row[4]} | error: {row[10] or '-'}"
            )
            self.write_log(dict(zip(SWEEP_HEADER, row)), step)
        payload = dict(
            config=_config_dict(cfg),
            rows=[dict(zip(SWEEP_HEADER, row)) for row in rows],
        )
        return RunOutput(payload, list(SWEEP_HEADER), rows)

    def _cell(self, rho: float, alpha: float, beta: float) -> list:
        cfg = self.experiment_cfg
        row = [rho, alpha, beta] + [""] * 5 + [None, None, None]
        try:
            p = Params(rho, alpha, beta, cfg.x0)
            row[3] = validate(p).value
            if validate(p) == ValidityClass.INVALID:
                row[10] = "InvalidParameters: outside P"
                return row
            regime = classify(p)
            row = _regime_row(p, regime)
            if cfg.quick_verify:
                checks = regime_checks(cfg, p, to_sim_config(cfg), regime, cfg.quick_n_paths)
                if checks:
                    row[8], row[9] = checks[0].observed, checks[0].passed
        except TidlabError as error:
            row[10] = f"{type(error).__name__}: {error}"
        return row
