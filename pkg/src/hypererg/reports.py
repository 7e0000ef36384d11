"""CSV and JSON serialisation of estimator results.

Both formats carry ``schema_version``; CSV files start with a
``# schema_version=N`` comment line followed by the header row.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from hypererg.estimators import ConvergenceReport, MaximalEstimate

SCHEMA_VERSION = 1
CONVERGE_COLUMNS = ("r", "start", "mean", "std_error", "target", "deviation", "flag")
MAXIMAL_COLUMNS = ("start", "sup_value")
TOLERANCE_POLICY = "flag if deviation > 3*std_error + bias_budget (chosen policy; no convergence rate is known)"


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def read_csv(text: str) -> tuple[int, list[dict]]:
    """Parse a report CSV back into ``(schema_version, rows)``."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# schema_version="):
        raise ValueError("missing schema_version line")
    version = int(lines[0].split("=", 1)[1])
    return version, list(csv.DictReader(lines[1:]))


def converge_rows(report: ConvergenceReport):
    for rec in report.records:
        yield (repr(rec.r), rec.start, repr(rec.estimate.mean), repr(rec.estimate.std_error),
               repr(rec.target), repr(rec.deviation), int(rec.flag))


def converge_csv(report: ConvergenceReport) -> str:
    return _csv(CONVERGE_COLUMNS, converge_rows(report))


def converge_json(report: ConvergenceReport, config: dict | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "report": "converge",
        "config": config or {},
        "target": report.target,
        "bias_budget": report.bias_budget,
        "tolerance_policy": TOLERANCE_POLICY,
        "records": [
            {
                "r": rec.r,
                "start": rec.start,
                "mean": rec.estimate.mean,
                "std_error": rec.estimate.std_error,
                "n_samples": rec.estimate.n_samples,
                "seed": rec.estimate.seed,
                "workers": rec.estimate.workers,
                "wall_time": rec.estimate.wall_time,
                "target": rec.target,
                "deviation": rec.deviation,
                "flag": rec.flag,
            }
            for rec in report.records
        ],
        "flagged_radii": report.flagged_radii,
        "passed": report.passed,
    }


def maximal_csv(est: MaximalEstimate) -> str:
    return _csv(MAXIMAL_COLUMNS, ((i, repr(float(v))) for i, v in enumerate(est.sup_values)))


def maximal_json(est: MaximalEstimate, config: dict | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "report": "maximal",
        "config": config or {},
        "p": est.p,
        "grid": list(est.grid),
        "n_per_r": est.n_per_r,
        "f_norm": est.f_norm,
        "maximal_norm": est.maximal_norm,
        "ratio": est.ratio,
        "note": "grid-restricted maximal function; a diagnostic witness, not a bound",
        "sup_values": [float(v) for v in est.sup_values],
    }


def dumps_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def write_pair(stem, csv_text: str, json_data: dict) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.json``; a .csv/.json suffix on stem is dropped."""
    stem = Path(stem)
    if stem.suffix in (".csv", ".json"):
        stem = stem.with_suffix("")
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
    csv_path.write_text(csv_text, encoding="utf-8")
    json_path.write_text(dumps_json(json_data), encoding="utf-8")
    return csv_path, json_path
