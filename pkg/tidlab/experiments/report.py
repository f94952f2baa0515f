import csv
from dataclasses import dataclass, field
import json
from typing import Any, List, Optional, Union

import numpy as np

from tidlab.common.utils.common_utils import format_float

SWEEP_HEADER = [
    "rho",
    "alpha",
    "beta",
    "validity",
    "recurrence",
    "normalization",
    "law",
    "envelope",
    "check_stat",
    "check_pass",
    "error",
]


@dataclass
class CheckResult:
    """One verification check

    Attributes:
        name (str): what was checked
        predicted (float or str): predicted value or law
        observed (float): observed statistic
        tolerance (float): acceptance threshold or band
        passed (bool): verdict

    """

    name: str
    predicted: Union[float, str]
    observed: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return dict(
            name=self.name,
            predicted=self.predicted,
            observed=self.observed,
            tolerance=self.tolerance,
            passed=self.passed,
        )

    def __str__(self) -> str:
        return (
            f"{self.name}: predicted {self.predicted} | observed {self.observed:.6g} "
            f"| tolerance {self.tolerance:.6g} | pass: {self.passed}"
        )


@dataclass
class VerifyReport:
    """Outcome of the check bundle of one regime.

    Envelope diagnostics are kept apart from checks: they warn but never fail.

    Attributes:
        regime (dict): serialized regime
        checks (list): CheckResult per check
        diagnostics (list): CheckResult per finite-horizon diagnostic
        seed (int): master seed
        wall_time (float): seconds
        config (dict): full experiment configuration

    """

    regime: dict
    checks: List[CheckResult] = field(default_factory=list)
    diagnostics: List[CheckResult] = field(default_factory=list)
    seed: int = 0
    wall_time: float = 0.0
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_dict(self) -> dict:
        return dict(
            regime=self.regime,
            checks=[check.to_dict() for check in self.checks],
            diagnostics=[check.to_dict() for check in self.diagnostics],
            passed=self.passed,
            seed=self.seed,
            wall_time=self.wall_time,
            config=self.config,
        )

    def table(self):
        header = ["kind", "name", "predicted", "observed", "tolerance", "pass"]
        rows = []
        for kind, checks in (("check", self.checks), ("diagnostic", self.diagnostics)):
            for check in checks:
                rows.append(
                    [
                        kind,
                        check.name,
                        check.predicted,
                        check.observed,
                        check.tolerance,
                        check.passed,
                    ]
                )
        return header, rows


@dataclass
class RunOutput:
    """What an experiment hands to the writer

    Attributes:
        payload (dict): JSON document
        header (list): CSV column names
        rows (list): CSV rows
        passed (bool): verification verdict, None when nothing was verified

    """

    payload: dict
    header: List[str]
    rows: List[list]
    passed: Optional[bool] = None


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def _plain(value: Any) -> Any:
    """numpy scalars and arrays to JSON-serializable values"""
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_plain(item) for item in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_csv(header: List[str], rows: List[list], path: str):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])


def write_json(payload: dict, path: str):
    with open(path, "w") as handle:
        json.dump(_plain(payload), handle, indent=2)
        handle.write("\n")


def write_output(output: RunOutput, path: str, fmt: str):
    """Single writer for every experiment result"""
    if fmt == "csv":
        write_csv(output.header, output.rows, path)
    else:
        write_json(output.payload, path)
