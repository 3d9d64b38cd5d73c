"""CSV reports.

Columns are ``trial, alg_cost, ref_cost, ratio``, one row per trial with a
positive reference cost.  Footer rows start with ``#``: zero-reference and
skipped trials, then the aggregates.  Floats are written with ``repr`` so
reading a report back gives the exact values.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

from .experiment import RatioReport, TrialResult

COLUMNS = ("trial", "alg_cost", "ref_cost", "ratio")
AGGREGATES = ("mean", "max", "stderr", "ratio_of_means", "slack")


def write_report_csv(report: RatioReport, path) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in report.rows:
            if r.ratio is not None:
                w.writerow([r.trial, repr(r.alg_cost), repr(r.ref_cost), repr(r.ratio)])
        if not report.trials:
            return
        for r in report.rows:
            if r.ratio is None:
                w.writerow(["# zero_ref", r.trial, repr(r.alg_cost), repr(r.ref_cost)])
        for t, reason in report.skipped:
            w.writerow(["# skipped", t, reason])
        w.writerow(["# mode", report.mode])
        for key in AGGREGATES:
            w.writerow([f"# {key}", repr(float(getattr(report, key)))])


def read_report_csv(path) -> RatioReport:
    """Rebuild the per-trial part of a report; aggregates are recomputed."""
    trials, slack, mode = [], 0.0, "hard"
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ValueError(f"{path}: not a ratio report (header {rows[0] if rows else None!r})")
    for row in rows[1:]:
        if not row:
            continue
        if row[0].startswith("#"):
            key = row[0][1:].strip()
            if key == "zero_ref":
                trials.append(TrialResult(int(row[1]), float(row[2]), float(row[3])))
            elif key == "skipped":
                trials.append(TrialResult(int(row[1]), math.nan, math.nan, skipped=row[2]))
            elif key == "slack":
                slack = float(row[1])
            elif key == "mode":
                mode = row[1]
            continue
        trials.append(TrialResult(int(row[0]), float(row[1]), float(row[2])))
    trials.sort(key=lambda r: r.trial)
    return RatioReport(trials, slack, mode)


def footer_values(path) -> dict:
    """The aggregate footer rows as written."""
    out = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if row and row[0].startswith("#") and row[0][1:].strip() in AGGREGATES:
                out[row[0][1:].strip()] = float(row[1])
    return out
