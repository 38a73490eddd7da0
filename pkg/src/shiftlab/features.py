"""Labeled feature rows and their CSV representation.

A FeatureTable is the hand-off format between the extraction pipeline and
everything downstream (normalization, shift estimation, evaluation). On disk
it is a plain CSV with header ``subject,condition,segment,f0..f{d-1}``;
lines starting with ``#`` are comments and carry the resolved run
configuration.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError, MissingInputError
from .utils import format_float

SEGMENT_TAGS = ("task", "baseline1", "baseline2")


@dataclass
class FeatureTable:
    """Rows of feature vectors with subject, condition and segment labels.

    Attributes
    ----------
    subjects : int array, shape (n,)
        Subject identifier per row.
    conditions : str array, shape (n,)
        Workload label per row ("low", "high", or "" when not applicable).
    segments : str array, shape (n,)
        Segment tag per row, one of ``SEGMENT_TAGS``.
    features : float array, shape (n, d)
    """

    subjects: np.ndarray
    conditions: np.ndarray
    segments: np.ndarray
    features: np.ndarray

    def __post_init__(self):
        self.subjects = np.asarray(self.subjects, dtype=np.int64)
        self.conditions = np.asarray(self.conditions, dtype=object)
        self.segments = np.asarray(self.segments, dtype=object)
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise DimensionMismatchError("features must be a 2-d array")
        n = self.features.shape[0]
        if not (len(self.subjects) == len(self.conditions) == len(self.segments) == n):
            raise DimensionMismatchError("label columns and feature rows disagree in length")
        bad = set(self.segments) - set(SEGMENT_TAGS)
        if bad:
            raise ConfigurationError(f"unknown segment tags: {sorted(bad)}")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subject_ids(self) -> list[int]:
        """Distinct subjects, ascending."""
        return sorted(int(s) for s in np.unique(self.subjects))

    def select(self, mask: np.ndarray) -> "FeatureTable":
        """New table with the rows where ``mask`` holds (order preserved)."""
        mask = np.asarray(mask)
        return FeatureTable(
            self.subjects[mask],
            self.conditions[mask],
            self.segments[mask],
            self.features[mask],
        )

    def copy(self) -> "FeatureTable":
        return FeatureTable(
            self.subjects.copy(),
            self.conditions.copy(),
            self.segments.copy(),
            self.features.copy(),
        )


def concat_tables(tables: list[FeatureTable]) -> FeatureTable:
    """Stack tables row-wise. All tables must share the feature dimension."""
    if not tables:
        raise ConfigurationError("cannot concatenate zero tables")
    dims = {t.dim for t in tables}
    if len(dims) > 1:
        raise DimensionMismatchError(f"tables have mixed feature dimensions: {sorted(dims)}")
    return FeatureTable(
        np.concatenate([t.subjects for t in tables]),
        np.concatenate([t.conditions for t in tables]),
        np.concatenate([t.segments for t in tables]),
        np.vstack([t.features for t in tables]),
    )


def _header(dim: int) -> list[str]:
    return ["subject", "condition", "segment"] + [f"f{i}" for i in range(dim)]


def write_features_csv(table: FeatureTable, path: str, comments: list[str] | None = None) -> None:
    """Write a table as CSV, with optional ``#``-prefixed comment lines on top."""
    buf = io.StringIO()
    for line in comments or []:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_header(table.dim))
    for i in range(table.n_rows):
        row = [str(int(table.subjects[i])), str(table.conditions[i]), str(table.segments[i])]
        row += [format_float(v) for v in table.features[i]]
        writer.writerow(row)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_features_csv(path: str) -> FeatureTable:
    """Read a table written by :func:`write_features_csv`.

    Comment lines are skipped. Raises if the file is missing or the header
    does not match the expected ``subject,condition,segment,f*`` layout.
    """
    if not os.path.exists(path):
        raise MissingInputError(f"feature file not found: {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ConfigurationError(f"no header row in {path}")
    header, data = rows[0], rows[1:]
    if header[:3] != ["subject", "condition", "segment"]:
        raise ConfigurationError(f"unexpected feature CSV header in {path}: {header[:3]}")
    dim = len(header) - 3
    if header[3:] != [f"f{i}" for i in range(dim)]:
        raise ConfigurationError(f"feature columns must be named f0..f{dim - 1}")
    subjects = [int(r[0]) for r in data]
    conditions = [r[1] for r in data]
    segments = [r[2] for r in data]
    feats = np.array([[float(v) for v in r[3:]] for r in data], dtype=np.float64)
    if feats.size == 0:
        feats = feats.reshape(0, dim)
    return FeatureTable(np.array(subjects), np.array(conditions, dtype=object),
                        np.array(segments, dtype=object), feats)
