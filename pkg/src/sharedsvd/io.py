"""Dense-CSV matrix I/O and report writers.

Matrices are comma-separated rows of decimal reals with an optional single
header row (detected when the first row has a non-numeric cell). Floats are
written with ``repr`` so a save/load round trip is bitwise exact.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import ContractError, ParseError
from .linalg import as_matrix


def _parse_cell(cell: str, row: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r}", row=row, col=col) from None


def load_matrix(path, format: str = "csv_dense") -> np.ndarray:
    """Read a dense CSV matrix, skipping an auto-detected header row."""
    if format != "csv_dense":
        raise ContractError(f"unknown format {format!r}")
    rows = []
    with open(path, newline="") as fh:
        raw = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not raw:
        raise ParseError(f"{path}: no data rows")
    start = 0
    try:
        [float(c) for c in raw[0]]
    except ValueError:
        start = 1  # header row
        if len(raw) == 1:
            raise ParseError(f"{path}: header without data") from None
    width = len(raw[start])
    for rix in range(start, len(raw)):
        cells = raw[rix]
        if len(cells) != width:
            raise ParseError(f"expected {width} columns, found {len(cells)}", row=rix + 1)
        rows.append([_parse_cell(c, rix + 1, cix + 1) for cix, c in enumerate(cells)])
    return as_matrix(np.array(rows, dtype=np.float64), str(path))


def save_matrix(path, m) -> None:
    m = as_matrix(m, "matrix")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in m:
            w.writerow([repr(float(x)) for x in row])


def load_labels(path) -> list[str]:
    """One label per line; labels are arbitrary strings."""
    labels = [line.strip() for line in Path(path).read_text().splitlines()]
    labels = [lab for lab in labels if lab]
    if not labels:
        raise ParseError(f"{path}: no labels found")
    return labels


def save_report(path, report) -> None:
    """Write a simulation report as CSV (estimator, mean, std, trials, flagged)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["estimator", "mean", "std", "trials", "flagged"])
        for name, stats in report.rows.items():
            w.writerow([name, repr(stats.mean), repr(stats.std), report.trials, stats.flagged])


def save_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
