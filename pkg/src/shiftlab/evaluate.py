"""Leave-one-subject-out evaluation and the repeated-subsampling protocol.

The workload question: can a forest trained on everyone else predict the
left-out subject's condition? The gap between its accuracy on held-out rows
of the training subjects and on the left-out subject is the generalization
cost of crossing domains, and is what the shift magnitudes are meant to
explain.

The repetition protocol re-runs the whole estimate stack ``n_reps`` times
on fresh task-row subsamples, then aggregates. Baseline rows are never
subsampled; they only feed normalization statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import ForestConfig, KnnConfig, accuracy, forest_fit, forest_predict
from .config import ExperimentConfig
from .errors import ConfigurationError
from .features import FeatureTable
from .normalize import NormScheme, normalize_table
from .shift import (
    conditional_shift,
    disparity_matrix,
    marginal_matrix,
    marginal_shift,
    table_to_dataset,
)
from .domains import MultiDomainDataset
from .utils import rng_for, seed_int, thread_map


@dataclass
class LosoSplit:
    """Row-index bookkeeping for one leave-one-subject-out fold.

    ``train_rows`` and ``holdout_rows`` map each training domain's position
    to disjoint row indices within that domain; the left-out domain
    contributes all of its rows as the test set.
    """

    left_out: int  # position in the dataset's domain order
    train_rows: dict[int, np.ndarray]
    holdout_rows: dict[int, np.ndarray]


@dataclass
class LosoResult:
    """Accuracies for one left-out subject."""

    subject_id: int
    train_accuracy: float
    test_accuracy: float
    gap: float


def loso_split(dataset: MultiDomainDataset, left_out: int,
               holdout_per_subject: int = 200, seed: int = 0) -> LosoSplit:
    """Split every training domain into fit rows and a fixed-size holdout.

    The holdout (``holdout_per_subject`` rows per training domain) measures
    training-domain accuracy on rows the model never saw. Raises when a
    training domain is too small to both give a holdout and keep at least
    one fit row, naming the offending subject.
    """
    m = dataset.n_domains
    if m < 2:
        raise ConfigurationError("leave-one-subject-out needs at least 2 domains")
    if not (0 <= left_out < m):
        raise ConfigurationError(f"left_out index {left_out} out of range for {m} domains")
    if holdout_per_subject < 1:
        raise ConfigurationError("holdout_per_subject must be >= 1")
    train_rows, holdout_rows = {}, {}
    for pos in range(m):
        if pos == left_out:
            continue
        n = dataset.features[pos].shape[0]
        if n <= holdout_per_subject:
            raise ConfigurationError(
                f"subject {dataset.domain_ids[pos]} has {n} rows; needs more than "
                f"{holdout_per_subject} to reserve a holdout"
            )
        perm = rng_for(seed, "loso", left_out, pos).permutation(n)
        holdout_rows[pos] = np.sort(perm[:holdout_per_subject])
        train_rows[pos] = np.sort(perm[holdout_per_subject:])
    return LosoSplit(left_out=left_out, train_rows=train_rows, holdout_rows=holdout_rows)


def generalization_gap(train_accuracy: float, test_accuracy: float) -> float:
    """Absolute difference of two accuracies; both must lie in [0, 1]."""
    for name, v in (("train", train_accuracy), ("test", test_accuracy)):
        if not (0.0 <= v <= 1.0):
            raise ConfigurationError(f"{name} accuracy must lie in [0, 1], got {v}")
    return float(abs(train_accuracy - test_accuracy))


def run_loso(table: FeatureTable, scheme: NormScheme,
             forest: ForestConfig = ForestConfig(n_trees=30),
             holdout_per_subject: int = 200, seed: int = 0,
             threads: int = 1) -> list[LosoResult]:
    """One full leave-one-subject-out pass over a feature table.

    Normalization statistics are computed per subject from that subject's
    own rows, so nothing leaks across the split: the left-out subject's
    transform never sees training subjects and vice versa. Returns one
    result per subject, in subject order.
    """
    normalized = normalize_table(table, scheme)
    dataset = table_to_dataset(normalized)
    m = dataset.n_domains

    def one(left_out: int) -> LosoResult:
        split = loso_split(dataset, left_out, holdout_per_subject, seed)
        train_x = np.vstack([dataset.features[p][split.train_rows[p]]
                             for p in range(m) if p != left_out])
        train_y = np.concatenate([dataset.labels[p][split.train_rows[p]]
                                  for p in range(m) if p != left_out])
        hold_x = np.vstack([dataset.features[p][split.holdout_rows[p]]
                            for p in range(m) if p != left_out])
        hold_y = np.concatenate([dataset.labels[p][split.holdout_rows[p]]
                                 for p in range(m) if p != left_out])
        model = forest_fit(train_x, train_y, forest.n_trees,
                           seed=seed_int(seed, "loso-forest", left_out))
        train_acc = accuracy(forest_predict(model, hold_x), hold_y)
        test_acc = accuracy(forest_predict(model, dataset.features[left_out]),
                            dataset.labels[left_out])
        return LosoResult(
            subject_id=dataset.domain_ids[left_out],
            train_accuracy=train_acc,
            test_accuracy=test_acc,
            gap=generalization_gap(train_acc, test_acc),
        )

    return thread_map(one, list(range(m)), threads)


def subsample_task_rows(table: FeatureTable, n_keep: int, seed: int = 0,
                        rep: int = 0) -> FeatureTable:
    """Keep ``n_keep`` task rows per subject and condition, all other rows whole.

    Sampling is without replacement and keyed by (seed, rep, subject,
    condition), so each repetition draws a fresh but reproducible subset.
    A subject-condition cell with fewer than ``n_keep`` task rows is an
    error naming the cell.
    """
    if n_keep < 1:
        raise ConfigurationError(f"n_keep must be >= 1, got {n_keep}")
    keep = np.zeros(table.n_rows, dtype=bool)
    keep[table.segments != "task"] = True
    task_mask = table.segments == "task"
    for sid in table.subject_ids():
        for cond in sorted(set(table.conditions[(table.subjects == sid) & task_mask])):
            cell = np.flatnonzero((table.subjects == sid) & task_mask
                                  & (table.conditions == cond))
            if cell.shape[0] < n_keep:
                raise ConfigurationError(
                    f"subject {sid} condition {cond!r} has {cell.shape[0]} task rows, "
                    f"needs >= {n_keep} to subsample"
                )
            rng = rng_for(seed, "subsample", rep, sid, cond)
            keep[np.sort(rng.choice(cell, n_keep, replace=False))] = True
    return table.select(keep)


@dataclass
class ReportSet:
    """Everything the repetition protocol produces for one scheme.

    Per-repetition scalars, per-repetition per-subject accuracies, and the
    repetition-averaged matrices. Aggregation (mean, population std) happens
    at reporting time.
    """

    scheme: str
    norm_exponent: int
    subjects: list[int]
    n_reps: int
    conditional: np.ndarray   # (R,)
    marginal: np.ndarray      # (R,)
    train_acc: np.ndarray     # (R, M)
    test_acc: np.ndarray      # (R, M)
    gap: np.ndarray           # (R, M)
    disparity_avg: np.ndarray  # (M, M)
    marginal_avg: np.ndarray   # (M, M)
    config: dict

    @property
    def n_subjects(self) -> int:
        return len(self.subjects)


def repeat_experiment(table: FeatureTable, config: ExperimentConfig) -> ReportSet:
    """Run the full estimate stack ``n_reps`` times on task-row subsamples.

    Each repetition: subsample task rows, normalize subject-wise, compute
    the disparity and separability matrices and their magnitudes, and run
    LOSO. Repetitions are independent work units keyed by (seed, rep), so
    any thread count yields the same numbers.
    """
    scheme = NormScheme(config.norm, config.norm_exponent)
    subjects = table.subject_ids()
    if len(subjects) < 2:
        raise ConfigurationError("the protocol needs at least 2 subjects")

    def one(rep: int) -> dict:
        sub = subsample_task_rows(table, config.subsample, seed=config.seed, rep=rep)
        normalized = normalize_table(sub, scheme)
        dataset = table_to_dataset(normalized)
        d = disparity_matrix(dataset, KnnConfig(config.k),
                             seed=seed_int(config.seed, "disparity", rep))
        h = marginal_matrix(dataset, ForestConfig(config.trees_subject),
                            seed=seed_int(config.seed, "marginal", rep),
                            folds=config.folds, diagonal=config.h_diagonal)
        loso = run_loso(sub, scheme, ForestConfig(config.trees_workload),
                        config.holdout_per_subject,
                        seed=seed_int(config.seed, "loso", rep))
        return {
            "cond": conditional_shift(d).value,
            "marg": marginal_shift(h).value,
            "d": d,
            "h": h,
            "loso": loso,
        }

    reps = thread_map(one, list(range(config.n_reps)), config.threads)
    m = len(subjects)
    r = config.n_reps
    out = ReportSet(
        scheme=config.norm,
        norm_exponent=config.norm_exponent,
        subjects=subjects,
        n_reps=r,
        conditional=np.array([x["cond"] for x in reps]),
        marginal=np.array([x["marg"] for x in reps]),
        train_acc=np.zeros((r, m)),
        test_acc=np.zeros((r, m)),
        gap=np.zeros((r, m)),
        disparity_avg=np.mean([x["d"] for x in reps], axis=0),
        marginal_avg=np.mean([x["h"] for x in reps], axis=0),
        config=config.echo_dict(),
    )
    for ri, x in enumerate(reps):
        for si, res in enumerate(x["loso"]):
            if res.subject_id != subjects[si]:
                raise ConfigurationError("subject order changed between repetitions")
            out.train_acc[ri, si] = res.train_accuracy
            out.test_acc[ri, si] = res.test_accuracy
            out.gap[ri, si] = res.gap
    return out
