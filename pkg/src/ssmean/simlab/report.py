"""Report serialization: aligned text plus machine-readable CSV/JSON with one
row per (cell, estimator) pair.

Text output rounds to 6 significant digits; CSV and JSON keep full double
precision. Output is a pure function of the reports, so files are
byte-identical across runs and thread counts.
"""

from __future__ import annotations

import csv
import json
import math
from typing import Sequence

from .runner import SimulationReport

CSV_COLUMNS = ("setting", "p", "n", "m", "estimator", "loss", "ci_length", "miscoverage", "mc_se")


def _m_value(stats) -> object:
    if stats.estimator != "ssls" or stats.m is None:
        return None
    return "inf" if math.isinf(stats.m) else int(stats.m)


def report_rows(reports: Sequence[SimulationReport]) -> list[dict]:
    """Flatten reports into one dict per (cell, estimator)."""
    rows = []
    for rep in reports:
        for col in rep.columns:
            rows.append(
                {
                    "setting": rep.setting,
                    "p": rep.p,
                    "n": rep.n,
                    "m": _m_value(col),
                    "estimator": col.estimator,
                    "loss": col.avg_sq_loss,
                    "ci_length": col.avg_ci_length,
                    "miscoverage": col.miscoverage,
                    "mc_se": col.loss_se,
                    "ci_length_se": col.ci_length_se,
                    "reps": col.reps,
                    "failures": col.failures,
                    "alpha": rep.alpha,
                    "seed": rep.seed,
                    "theta_true": rep.theta_true,
                }
            )
    return rows


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report_csv(reports: Sequence[SimulationReport], path) -> None:
    rows = report_rows(reports)
    extra = ("ci_length_se", "reps", "failures", "alpha", "seed", "theta_true")
    header = list(CSV_COLUMNS) + list(extra)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(row[name]) for name in header])


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else repr(value)
    return value


def write_report_json(reports: Sequence[SimulationReport], path) -> None:
    rows = [{k: _jsonable(v) for k, v in row.items()} for row in report_rows(reports)]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.6g}"


def format_report_text(reports: Sequence[SimulationReport]) -> str:
    """Aligned per-cell blocks; prints both coverage and miscoverage."""
    lines = []
    for rep in reports:
        lines.append(
            f"setting={rep.setting} p={rep.p} n={rep.n} seed={rep.seed} "
            f"alpha={_fmt(rep.alpha)} theta={_fmt(rep.theta_true)} "
            f"losses={'truncated' if rep.truncate else 'plain'}"
        )
        header = ["estimator", "loss", "mc_se", "ci_length", "coverage", "miscoverage", "reps", "failures"]
        table = [header]
        for col in rep.columns:
            coverage = 1.0 - col.miscoverage if not math.isnan(col.miscoverage) else float("nan")
            table.append(
                [
                    col.label,
                    _fmt(col.avg_sq_loss),
                    _fmt(col.loss_se),
                    _fmt(col.avg_ci_length),
                    _fmt(coverage),
                    _fmt(col.miscoverage),
                    str(col.reps),
                    str(col.failures),
                ]
            )
        widths = [max(len(row[i]) for row in table) for i in range(len(header))]
        for row in table:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        lines.append("")
    return "\n".join(lines)
