"""CSV result tables and the JSON metadata sidecar.

Floats are written with 17 significant digits so every value parses back
to the identical double.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

from .assignment import Assignment, AssignmentMatrix
from .simulation import McResult, McRow, Method, MotivatingRow, TraceRow

SWEEP_HEADER = ("method", "c", "p_ic_mean", "p_ic_std", "runs")
TRACE_HEADER = ("variant", "k", "f_min", "alpha")
MOTIVATING_HEADER = ("alpha_deg", "J0", "Je", "traceP")
MATRIX_HEADER = ("realization", "i", "j", "cost", "assigned")
ASSIGNMENT_HEADER = ("track_2", "track_1", "cost")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read(path: Path, header: Sequence[str]) -> list[dict[str, str]]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != tuple(header):
            raise ValueError(f"{path}: expected header {','.join(header)}")
        return list(reader)


def emit_csv(result, path) -> None:
    """Write a sweep result, optimizer trace or motivating table as CSV."""
    if isinstance(result, McResult):
        _write(path, SWEEP_HEADER, ((r.method.value, fmt(r.c), fmt(r.p_ic_mean),
                                     fmt(r.p_ic_std), r.runs) for r in result.rows))
        return
    rows = list(result)
    if rows and isinstance(rows[0], TraceRow):
        _write(path, TRACE_HEADER, ((r.variant, r.k, fmt(r.f_min), fmt(r.alpha)) for r in rows))
    elif rows and isinstance(rows[0], MotivatingRow):
        _write(path, MOTIVATING_HEADER, ((fmt(r.alpha_deg), fmt(r.j0), fmt(r.je),
                                          fmt(r.trace_p)) for r in rows))
    else:
        raise TypeError(f"don't know how to write {type(result).__name__}")


def read_sweep_csv(path) -> McResult:
    return McResult(tuple(McRow(Method(r["method"]), float(r["c"]), float(r["p_ic_mean"]),
                                float(r["p_ic_std"]), int(r["runs"]))
                          for r in _read(path, SWEEP_HEADER)))


def read_trace_csv(path) -> list[TraceRow]:
    return [TraceRow(r["variant"], int(r["k"]), float(r["f_min"]), float(r["alpha"]))
            for r in _read(path, TRACE_HEADER)]


def read_motivating_csv(path) -> list[MotivatingRow]:
    return [MotivatingRow(float(r["alpha_deg"]), float(r["J0"]), float(r["Je"]),
                          float(r["traceP"])) for r in _read(path, MOTIVATING_HEADER)]


def emit_matrices_csv(items: Sequence[tuple[AssignmentMatrix, Assignment]], path) -> None:
    """Long-format cost matrices, 1-based indices; ``assigned`` marks chosen pairs."""
    rows = []
    for k, (mat, asg) in enumerate(items, start=1):
        chosen = {(i, j) for j, i in enumerate(asg.perm)}
        for i in range(mat.size):
            for j in range(mat.size):
                rows.append((k, i + 1, j + 1, fmt(mat.costs[i, j]), int((i, j) in chosen)))
    _write(path, MATRIX_HEADER, rows)


def emit_assignment_csv(mat: AssignmentMatrix, asg: Assignment, path) -> None:
    _write(path, ASSIGNMENT_HEADER, ((j + 1, i + 1, fmt(mat.costs[i, j]))
                                     for j, i in enumerate(asg.perm)))


def read_matrix_csv(path) -> list[list[float]]:
    """Plain numeric CSV, one matrix row per line, no header."""
    with Path(path).open(newline="") as fh:
        return [[float(x) for x in row] for row in csv.reader(fh) if row]


def write_metadata(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
