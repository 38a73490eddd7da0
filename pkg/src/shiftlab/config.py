"""Resolved experiment configuration.

One dataclass carries every knob the pipeline and estimators read.
Precedence when resolving: command-line flags > config file > defaults,
with the ``SHIFTLAB_SEED`` environment variable overriding only the
*default* seed (an explicit flag or file value still wins).

The ``echo_dict`` snapshot is embedded in every output file. It contains
computational parameters only; output paths and thread counts are excluded
on purpose so byte-identical reruns hold across directories and thread
counts.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigurationError, MissingInputError
from .signal import DEFAULT_BANDS, BandSpec, parse_bands

SEED_ENV_VAR = "SHIFTLAB_SEED"
DEFAULT_SEED = 10


@dataclass(frozen=True)
class ExperimentConfig:
    """Every tunable of the study protocol, with paper-matched defaults."""

    norm: str = "none"
    norm_exponent: int = 1
    k: int = 1
    trees_subject: int = 20     # pairwise subject-vs-subject forests
    trees_workload: int = 30    # the workload classifier under evaluation
    folds: int = 5
    n_reps: int = 30
    subsample: int = 300
    holdout_per_subject: int = 200
    seed: int = DEFAULT_SEED
    h_diagonal: float = 0.5
    bands: tuple[BandSpec, ...] = DEFAULT_BANDS
    target_hz: float = 250.0
    bp_low_hz: float = 0.5
    bp_high_hz: float = 45.0
    epoch_len_s: float = 4.0
    overlap_s: float = 3.0
    threads: int = 1

    def __post_init__(self):
        for name in ("k", "trees_subject", "trees_workload", "n_reps", "subsample",
                     "holdout_per_subject", "threads"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.folds < 2:
            raise ConfigurationError(f"folds must be >= 2, got {self.folds}")
        if self.norm_exponent not in (1, 2):
            raise ConfigurationError(f"norm_exponent must be 1 or 2, got {self.norm_exponent}")
        if not (0.0 <= self.h_diagonal <= 1.0):
            raise ConfigurationError("h_diagonal must lie in [0, 1]")

    def echo_dict(self) -> dict:
        """Computational parameters for embedding in outputs (no paths, no threads)."""
        return {
            "norm": self.norm,
            "norm_exponent": self.norm_exponent,
            "k": self.k,
            "trees_subject": self.trees_subject,
            "trees_workload": self.trees_workload,
            "folds": self.folds,
            "n_reps": self.n_reps,
            "subsample": self.subsample,
            "holdout_per_subject": self.holdout_per_subject,
            "seed": self.seed,
            "h_diagonal": self.h_diagonal,
            "bands": [[b.name, b.low_hz, b.high_hz] for b in self.bands],
            "target_hz": self.target_hz,
            "bp_low_hz": self.bp_low_hz,
            "bp_high_hz": self.bp_high_hz,
            "epoch_len_s": self.epoch_len_s,
            "overlap_s": self.overlap_s,
        }

    def echo_json(self) -> str:
        return json.dumps(self.echo_dict(), sort_keys=True)


_FILE_KEYS = {f.name for f in fields(ExperimentConfig)}


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


def load_config_file(path: str) -> dict:
    """Read a JSON config file, rejecting unknown keys."""
    if not os.path.exists(path):
        raise MissingInputError(f"config file not found: {path}")
    with open(path) as fh:
        raw = json.load(fh)
    unknown = set(raw) - _FILE_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    return raw


def resolve_config(file_values: dict | None = None, flag_values: dict | None = None) -> ExperimentConfig:
    """Merge defaults, config file and flags into one frozen config.

    ``flag_values`` entries that are None count as "not given". Band strings
    are parsed here so both sources may use the ``name:lo:hi,...`` form.
    """
    merged: dict = {"seed": _default_seed()}
    for source in (file_values or {}, flag_values or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in _FILE_KEYS:
                raise ConfigurationError(f"unknown config key: {key}")
            merged[key] = value
    if isinstance(merged.get("bands"), str):
        merged["bands"] = parse_bands(merged["bands"])
    elif isinstance(merged.get("bands"), (list, tuple)) and merged["bands"] \
            and not isinstance(merged["bands"][0], BandSpec):
        merged["bands"] = tuple(BandSpec(str(b[0]), float(b[1]), float(b[2]))
                                for b in merged["bands"])
    return ExperimentConfig(**merged)
