"""CSV and JSON emission of trajectories and sweep records."""

from __future__ import annotations

import csv
import json
import math
from typing import IO, Any, Iterable, Optional, Sequence

from trustdyn.dynamics import Trajectory
from trustdyn.experiments import SweepRecord

TRAJECTORY_COLUMNS = ("t", "s1", "s0", "s")
CHEATING_COLUMNS = ("q", "s_b", "total_cheating", "regime")
LAMBDA_STAR_COLUMNS = ("theta", "q", "lambda_star", "verdict_count")


def fmt(value: Any) -> str:
    """Render a value for CSV: floats with 17 significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def fmt_human(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.6g}"


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_records(
    rows: Iterable[dict[str, Any]],
    columns: Sequence[str],
    fh: IO[str],
    fmt_name: str = "csv",
) -> None:
    """Write flat records as CSV (header ``columns``) or as a JSON array."""
    rows = list(rows)
    if fmt_name == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row.get(c)) for c in columns])
    elif fmt_name == "json":
        records = [{c: _json_value(row.get(c)) for c in columns} for row in rows]
        json.dump(records, fh, indent=1)
        fh.write("\n")
    else:
        raise ValueError(f"unknown output format {fmt_name!r}")


def trajectory_rows(trajectory: Trajectory) -> list[dict[str, float]]:
    return [smp._asdict() for smp in trajectory.samples]


def cheating_rows(records: Iterable[SweepRecord]) -> list[dict[str, Any]]:
    return [
        {
            "q": r.q,
            "s_b": r.outputs.get("s_b"),
            "total_cheating": r.outputs.get("total_cheating"),
            "regime": r.label,
        }
        for r in records
    ]


def lambda_star_rows(records: Iterable[SweepRecord]) -> list[dict[str, Any]]:
    rows = []
    for r in records:
        count = r.outputs.get("verdict_count")
        rows.append({
            "theta": r.theta,
            "q": r.q,
            "lambda_star": r.outputs.get("lambda_star"),
            "verdict_count": None if count is None else int(count),
        })
    return rows
