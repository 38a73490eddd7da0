"""Subject-wise feature normalization.

Each subject's rows are shifted and scaled using statistics estimated from
that subject's own data only, which removes per-person offsets before any
cross-subject comparison. Three estimating schemes are supported:

- ``whitening``: statistics from the subject's task rows;
- ``baseline1`` / ``baseline2``: statistics from the matching rest segment;
- ``none``: identity (no statistics, no change).

The transform is x' = (x - beta) / gamma**e with beta the per-feature mean,
gamma the per-feature population standard deviation, and e in {1, 2}
(1 by default, i.e. a plain z-score).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateStatisticsError,
    MissingBaselineError,
)
from .features import FeatureTable

SCHEME_KINDS = ("none", "whitening", "baseline1", "baseline2")

# Keeps zero-variance features finite: gamma is offset before exponentiation.
GAMMA_EPSILON = 1e-12

_SOURCE_SEGMENT = {"whitening": "task", "baseline1": "baseline1", "baseline2": "baseline2"}


@dataclass(frozen=True)
class NormScheme:
    """Normalization scheme selector.

    ``denominator_exponent`` picks between dividing by gamma (1) and by
    gamma squared (2).
    """

    kind: str = "none"
    denominator_exponent: int = 1

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ConfigurationError(f"scheme must be one of {SCHEME_KINDS}, got {self.kind!r}")
        if self.denominator_exponent not in (1, 2):
            raise ConfigurationError(
                f"denominator exponent must be 1 or 2, got {self.denominator_exponent}"
            )

    @property
    def source_segment(self) -> str | None:
        """Segment whose rows supply the statistics (None for 'none')."""
        return _SOURCE_SEGMENT.get(self.kind)


@dataclass
class NormStats:
    """Per-subject location and scale estimates."""

    subject_id: int
    beta: np.ndarray
    gamma: np.ndarray
    source_segment: str

    def to_json_dict(self) -> dict:
        return {
            "subject_id": int(self.subject_id),
            "beta": [float(v) for v in self.beta],
            "gamma": [float(v) for v in self.gamma],
            "source_segment": self.source_segment,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "NormStats":
        return cls(int(d["subject_id"]), np.asarray(d["beta"], dtype=np.float64),
                   np.asarray(d["gamma"], dtype=np.float64), d["source_segment"])


def compute_norm_stats(table: FeatureTable, subject_id: int, scheme: NormScheme) -> NormStats:
    """Estimate beta and gamma for one subject from the scheme's source rows.

    Raises :class:`MissingBaselineError` when a baseline scheme finds no rows
    of its segment for the subject, and :class:`DegenerateStatisticsError`
    when fewer than 2 rows are available.
    """
    if scheme.kind == "none":
        raise ConfigurationError("scheme 'none' does not define statistics")
    segment = scheme.source_segment
    mask = (table.subjects == subject_id) & (table.segments == segment)
    rows = table.features[mask]
    if rows.shape[0] == 0 and scheme.kind in ("baseline1", "baseline2"):
        raise MissingBaselineError(
            f"subject {subject_id} has no {segment} rows required by scheme {scheme.kind!r}"
        )
    if rows.shape[0] < 2:
        raise DegenerateStatisticsError(
            f"subject {subject_id}: {rows.shape[0]} {segment} row(s), need at least 2"
        )
    return NormStats(
        subject_id=int(subject_id),
        beta=rows.mean(axis=0),
        gamma=rows.std(axis=0),  # population std (ddof=0)
        source_segment=segment,
    )


def compute_all_stats(table: FeatureTable, scheme: NormScheme) -> dict[int, NormStats]:
    """Statistics for every subject present in the table."""
    return {sid: compute_norm_stats(table, sid, scheme) for sid in table.subject_ids()}


def apply_normalization(table: FeatureTable, stats: dict[int, NormStats] | None,
                        scheme: NormScheme) -> FeatureTable:
    """Apply x' = (x - beta) / gamma**e row-wise, per subject.

    Row order and all label columns are preserved. With scheme 'none' the
    table is returned as an identical copy and ``stats`` is ignored. Every
    subject in the table must have an entry in ``stats``.
    """
    if scheme.kind == "none":
        return table.copy()
    if stats is None:
        raise ConfigurationError(f"scheme {scheme.kind!r} requires per-subject statistics")
    out = table.copy()
    e = scheme.denominator_exponent
    for sid in table.subject_ids():
        if sid not in stats:
            raise ConfigurationError(f"no normalization statistics for subject {sid}")
        st = stats[sid]
        if st.beta.shape[0] != table.dim:
            raise ConfigurationError(
                f"statistics for subject {sid} have dimension {st.beta.shape[0]}, table has {table.dim}"
            )
        mask = table.subjects == sid
        denom = (st.gamma + GAMMA_EPSILON) ** e
        out.features[mask] = (table.features[mask] - st.beta) / denom
    return out


def normalize_table(table: FeatureTable, scheme: NormScheme) -> FeatureTable:
    """Compute per-subject statistics and apply them in one step."""
    if scheme.kind == "none":
        return table.copy()
    return apply_normalization(table, compute_all_stats(table, scheme), scheme)
