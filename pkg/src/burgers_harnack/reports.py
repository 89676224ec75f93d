"""Report records shared by the estimators, the experiment drivers and the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

CSV_HEADER = "experiment,param_json,left,left_se,right,right_se,margin,verdict,runtime_s"


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n: int


@dataclass(frozen=True)
class InequalityReport:
    """One verified instance: left <= right with Monte-Carlo uncertainty.

    margin = right - left; the default verdict allows a 3-sigma statistical
    excursion.  Identity-style rows (two_sided in params) use |margin| instead.
    """

    experiment: str
    params: dict = field(repr=False)
    left: float
    left_se: float
    right: float
    right_se: float
    verdict: str  # "pass" or "fail"
    runtime_s: float = 0.0

    @property
    def margin(self) -> float:
        return self.right - self.left


def combined_se(left_se: float, right_se: float) -> float:
    return float((left_se ** 2 + right_se ** 2) ** 0.5)


def make_report(experiment: str, params: dict, left: float, left_se: float,
                right: float, right_se: float, *, two_sided: bool = False,
                slack: float = 0.0, runtime_s: float = 0.0) -> InequalityReport:
    margin = right - left
    tol = 3.0 * combined_se(left_se, right_se) + slack
    ok = abs(margin) <= tol if two_sided else margin >= -tol
    return InequalityReport(experiment, params, left, left_se, right, right_se,
                            "pass" if ok else "fail", runtime_s)


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def report_fields(r: InequalityReport) -> list[str]:
    params = json.dumps(r.params, sort_keys=True, separators=(",", ":"))
    # runtime_s is written as 0.000 so that equal-seed runs are byte-identical;
    # wall-clock timings go to the run manifest instead.
    return [r.experiment, params, _fmt(r.left), _fmt(r.left_se),
            _fmt(r.right), _fmt(r.right_se), _fmt(r.margin), r.verdict, "0.000"]


def write_csv(path, reports) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for r in reports:
            writer.writerow(report_fields(r))
