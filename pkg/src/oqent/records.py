"""Sweep rows and their CSV encodings."""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

IDEAL_COLUMNS = ("alpha_rad", "raw", "normalized", "baseline")
STRENGTH_COLUMNS = ("tau_s", "alpha_rad", "raw", "normalized", "baseline")
FIDELITY_COLUMNS = ("delta_j", "gate_fidelity", "state_fidelity")
SURFACE_COLUMNS = ("theta1_rad", "theta2_rad", "strength")


@dataclass(frozen=True)
class SweepRecord:
    """One sweep row; unused fields stay ``None``."""

    alpha_rad: float | None = None
    tau_s: float | None = None
    delta_j: float | None = None
    raw: float | None = None
    normalized: float | None = None
    baseline: float | None = None
    gate_fidelity: float | None = None
    state_fidelity: float | None = None

    def replace(self, **changes) -> "SweepRecord":
        return dataclasses.replace(self, **changes)


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
    """Write a header plus rows with ``repr``-precision floats and LF endings."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_records(path: str | Path, columns: Sequence[str], records: Iterable[SweepRecord]) -> Path:
    rows = []
    for r in records:
        row = [getattr(r, c) for c in columns]
        if any(v is None for v in row):
            raise ValueError(f"record {r} lacks one of the columns {columns}")
        rows.append([float(v) for v in row])
    return write_csv(path, columns, rows)


def read_csv(path: str | Path) -> list[dict[str, float]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]
