"""Readers for the study CLI's documented CSV outputs.

Three input shapes are understood:

- runs file: ``repetition,scheme,metric,subject,value`` long-format rows;
- matrix file: a bare comma grid, optionally preceded by ``# subjects:``;
- per-subject file: ``subject,scheme,value`` rows.

``#`` lines are comments everywhere. These readers are intentionally
independent of the producing package; the CSV text is the only contract.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

RUNS_HEADER = ["repetition", "scheme", "metric", "subject", "value"]
BARS_HEADER = ["subject", "scheme", "value"]

# Canonical scheme order for stable axes; unknown names sort after these.
SCHEME_ORDER = ("none", "whitening", "baseline1", "baseline2")


class PlotInputError(Exception):
    """Raised when an input file is missing, malformed, or empty."""


@dataclass
class RunsData:
    rows: list[dict]

    def schemes(self) -> list[str]:
        present = {r["scheme"] for r in self.rows}
        ordered = [s for s in SCHEME_ORDER if s in present]
        return ordered + sorted(present - set(SCHEME_ORDER))

    def metrics(self) -> set[str]:
        return {r["metric"] for r in self.rows}

    def values(self, metric: str, scheme: str, subject: str | None = None) -> np.ndarray:
        picked = [r["value"] for r in self.rows
                  if r["metric"] == metric and r["scheme"] == scheme
                  and (subject is None or r["subject"] == subject)]
        return np.asarray(picked, dtype=np.float64)

    def subjects(self, metric: str) -> list[str]:
        seen: list[str] = []
        for r in self.rows:
            if r["metric"] == metric and r["subject"] not in seen:
                seen.append(r["subject"])
        return seen


def _data_rows(path: str) -> list[list[str]]:
    if not os.path.exists(path):
        raise PlotInputError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        return [r for r in csv.reader(fh) if r and not r[0].startswith("#")]


def read_runs(path: str) -> RunsData:
    rows = _data_rows(path)
    if not rows or rows[0] != RUNS_HEADER:
        raise PlotInputError(
            f"{path}: expected header {','.join(RUNS_HEADER)}")
    if len(rows) == 1:
        raise PlotInputError(f"{path}: no data rows")
    try:
        parsed = [
            {"repetition": int(r[0]), "scheme": r[1], "metric": r[2],
             "subject": r[3], "value": float(r[4])}
            for r in rows[1:]
        ]
    except (ValueError, IndexError) as exc:
        raise PlotInputError(f"{path}: malformed row ({exc})") from exc
    return RunsData(parsed)


def read_matrix(path: str) -> tuple[np.ndarray, list[str] | None]:
    """Read a matrix grid; returns (matrix, subject labels or None)."""
    if not os.path.exists(path):
        raise PlotInputError(f"input file not found: {path}")
    subjects = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# subjects:"):
                    subjects = [s.strip() for s in line.split(":", 1)[1].split(",")]
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError as exc:
                raise PlotInputError(f"{path}: non-numeric matrix row") from exc
    if not rows:
        raise PlotInputError(f"{path}: no matrix rows")
    if {len(r) for r in rows} != {len(rows)}:
        raise PlotInputError(f"{path}: matrix is not square")
    return np.asarray(rows, dtype=np.float64), subjects


def read_subject_bars(path: str) -> list[dict]:
    rows = _data_rows(path)
    if not rows or rows[0] != BARS_HEADER:
        raise PlotInputError(
            f"{path}: expected header {','.join(BARS_HEADER)} "
            "(is the scheme column present?)")
    if len(rows) == 1:
        raise PlotInputError(f"{path}: no data rows")
    try:
        return [{"subject": r[0], "scheme": r[1], "value": float(r[2])}
                for r in rows[1:]]
    except (ValueError, IndexError) as exc:
        raise PlotInputError(f"{path}: malformed row ({exc})") from exc


def ordered_schemes(names: set[str]) -> list[str]:
    known = [s for s in SCHEME_ORDER if s in names]
    return known + sorted(names - set(SCHEME_ORDER))
