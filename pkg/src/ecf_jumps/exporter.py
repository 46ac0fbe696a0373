"""Write curves, paths, test results and experiment reports as CSV or JSON."""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterator, Mapping, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import Any, TextIO

from ecf_jumps.ecf import EcfCurve
from ecf_jumps.experiments import ExperimentReport, record_row
from ecf_jumps.simulate import ModelSpec, PathSample

Target = Path | TextIO


def format_float(x: float) -> str:
    """17 significant digits, enough to read back the same double."""
    return f"{x:.17g}"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, Mapping):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return value


@contextmanager
def _open(target: Target) -> Iterator[TextIO]:
    if isinstance(target, Path):
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", newline="", encoding="utf-8") as f:
            yield f
    else:
        yield target


def write_ecf_csv(curve: EcfCurve, target: Target) -> None:
    """Columns ``p,g_n``: the n - 1 grid rows, then ``terminal,<value>``."""
    with _open(target) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["p", "g_n"])
        for k, g in enumerate(curve.grid):
            writer.writerow([format_float(k / curve.n), format_float(float(g))])
        writer.writerow(["terminal", format_float(curve.terminal)])


def write_path_csv(path: PathSample, spec: ModelSpec, target: Target) -> None:
    """Columns ``step,t,value,jumps``; ``jumps`` counts jumps in the step ending at t."""
    with _open(target) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["step", "t", "value", "jumps"])
        for i, value in enumerate(path.values):
            jumps = 0 if i == 0 else int(path.jump_counts[i - 1])
            writer.writerow([i, format_float(i * spec.dt), format_float(float(value)), jumps])


def write_json(payload: Mapping[str, Any], target: Target) -> None:
    with _open(target) as f:
        json.dump(_json_value(payload), f, indent=2, allow_nan=False)
        f.write("\n")


def _write_rows(rows: Sequence[Mapping[str, Any]], target: Target) -> None:
    with _open(target) as f:
        writer = csv.writer(f, lineterminator="\n")
        if not rows:
            return
        header = list(rows[0])
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row[key]) for key in header])


def write_report_csv(report: ExperimentReport, target: Target, timings: bool = False) -> None:
    """One row per cell, in cell order."""
    _write_rows([row.as_row(timings) for row in report.rows], target)


def write_records_csv(report: ExperimentReport, target: Target, timings: bool = False) -> None:
    """One row per replication; empty when the run kept no records."""
    records = report.records or ()
    _write_rows([record_row(r, timings) for r in records], target)


def write_report_json(
    report: ExperimentReport,
    target: Target,
    timings: bool = False,
    records: bool = False,
) -> None:
    write_json(report.to_dict(timings=timings, records=records), target)
