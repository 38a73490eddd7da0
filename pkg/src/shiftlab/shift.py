"""Cross-domain shift estimators.

Two complementary views of how a collection of labeled domains differs:

- Conditional shift: how much the label-given-feature rule changes between
  domains. A k-NN trained on domain j scores the rows of domain i; the
  disagreement rate, symmetrized by taking the smaller direction, fills a
  pairwise disparity matrix D.
- Marginal shift: how distinguishable the feature clouds themselves are. A
  cross-validated forest separates each pair of domains on pseudo-labels;
  its accuracy fills a matrix H.

Both matrices are reduced to a single [0, 1] magnitude via the Frobenius
norm divided by the number of domains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import (
    ForestConfig,
    KnnConfig,
    kfold_cv,
    knn_fit,
    knn_predict,
)
from .domains import CONDITION_CODES, MultiDomainDataset
from .errors import ConfigurationError, DegenerateStatisticsError
from .features import FeatureTable
from .utils import rng_for, seed_int, thread_map


@dataclass
class ShiftEstimate:
    """A scalar shift magnitude plus the matrix it was reduced from."""

    value: float
    kind: str  # "conditional" or "marginal"
    matrix: np.ndarray
    config: dict

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": float(self.value),
            "config": self.config,
            "matrix": [[float(v) for v in row] for row in self.matrix],
        }


def table_to_dataset(table: FeatureTable, segment: str = "task") -> MultiDomainDataset:
    """Group a table's rows of one segment into per-subject domains.

    Conditions are encoded low=0, high=1; any other value is rejected.
    Subjects are ordered ascending and become the matrix order.
    """
    mask = table.segments == segment
    sub = table.select(mask)
    ids, feats, labels = [], [], []
    for sid in sub.subject_ids():
        rows = sub.select(sub.subjects == sid)
        codes = []
        for c in rows.conditions:
            if c not in CONDITION_CODES:
                raise ConfigurationError(
                    f"subject {sid} has row with condition {c!r}; expected one of "
                    f"{sorted(CONDITION_CODES)}"
                )
            codes.append(CONDITION_CODES[c])
        ids.append(sid)
        feats.append(rows.features)
        labels.append(np.asarray(codes, dtype=np.int64))
    if not ids:
        raise ConfigurationError(f"table has no {segment!r} rows")
    return MultiDomainDataset(ids, feats, labels)


def estimate_mu(dataset: MultiDomainDataset, i: int, j: int,
                knn: KnnConfig = KnnConfig(), seed: int = 0) -> float:
    """Disagreement between domain i's labels and a k-NN fit on domain j.

    For i != j the model trains on all of domain j and scores all of domain
    i. For i == j the domain is split 50/50 at random (seeded) so the model
    never scores its own training rows.
    """
    m = dataset.n_domains
    if not (0 <= i < m and 0 <= j < m):
        raise ConfigurationError(f"domain index out of range: ({i}, {j}) with {m} domains")
    if i != j:
        xj, yj = dataset.features[j], dataset.labels[j]
        xi, yi = dataset.features[i], dataset.labels[i]
        if xj.shape[0] == 0 or xi.shape[0] == 0:
            raise ConfigurationError("cannot estimate disagreement on an empty domain")
        model = knn_fit(xj, yj, knn.k)
        pred = knn_predict(model, xi)
        return float(np.mean(pred != yi))
    x, y = dataset.features[i], dataset.labels[i]
    if x.shape[0] < 2:
        raise DegenerateStatisticsError(
            f"domain {dataset.domain_ids[i]} needs >= 2 rows for a held-out self-estimate"
        )
    perm = rng_for(seed, "self-split", i).permutation(x.shape[0])
    half = x.shape[0] // 2
    train, test = perm[:half], perm[half:]
    model = knn_fit(x[train], y[train], knn.k)
    pred = knn_predict(model, x[test])
    return float(np.mean(pred != y[test]))


def disparity_matrix(dataset: MultiDomainDataset, knn: KnnConfig = KnnConfig(),
                     seed: int = 0, threads: int = 1) -> np.ndarray:
    """Symmetric pairwise disparity D, entries in [0, 1].

    Off-diagonal entries take min(mu_ij, mu_ji); the diagonal uses the
    held-out self-estimate. Work units are keyed by (seed, i, j), so the
    result is identical for any thread count.
    """
    m = dataset.n_domains
    if m < 1:
        raise ConfigurationError("dataset has no domains")
    pairs = [(i, j) for i in range(m) for j in range(i, m)]

    def cell(pair: tuple[int, int]) -> float:
        i, j = pair
        if i == j:
            return estimate_mu(dataset, i, i, knn, seed=seed_int(seed, "diag", i))
        mu_ij = estimate_mu(dataset, i, j, knn)
        mu_ji = estimate_mu(dataset, j, i, knn)
        return min(mu_ij, mu_ji)

    values = thread_map(cell, pairs, threads)
    d = np.zeros((m, m))
    for (i, j), v in zip(pairs, values):
        d[i, j] = d[j, i] = v
    return d


def _frobenius_estimate(matrix: np.ndarray, kind: str, config: dict | None) -> ShiftEstimate:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ConfigurationError(f"{kind} matrix must be square, got shape {matrix.shape}")
    if matrix.shape[0] == 0:
        raise ConfigurationError(f"{kind} matrix is empty")
    if matrix.min() < -1e-9 or matrix.max() > 1 + 1e-9:
        raise ConfigurationError(f"{kind} matrix entries must lie in [0, 1]")
    value = float(np.linalg.norm(matrix, "fro") / matrix.shape[0])
    return ShiftEstimate(value=value, kind=kind, matrix=matrix.copy(), config=dict(config or {}))


def conditional_shift(matrix: np.ndarray, config: dict | None = None) -> ShiftEstimate:
    """Frobenius norm of D divided by the domain count; lands in [0, 1]."""
    return _frobenius_estimate(matrix, "conditional", config)


def pairwise_domain_score(dataset: MultiDomainDataset, i: int, j: int,
                          forest: ForestConfig = ForestConfig(), seed: int = 0,
                          folds: int = 5) -> float:
    """Cross-validated accuracy of a forest telling domain i from domain j.

    Rows get pseudo-labels (i -> 0, j -> 1); the larger domain is subsampled
    to the smaller one's size so the pool is balanced. Chance level 0.5
    means indistinguishable marginals.
    """
    if i == j:
        raise ConfigurationError("pairwise score needs two distinct domains")
    m = dataset.n_domains
    if not (0 <= i < m and 0 <= j < m):
        raise ConfigurationError(f"domain index out of range: ({i}, {j}) with {m} domains")
    xi, xj = dataset.features[i], dataset.features[j]
    n = min(xi.shape[0], xj.shape[0])
    if n == 0:
        raise ConfigurationError("cannot score an empty domain")
    rng = rng_for(seed, "balance", i, j)
    if xi.shape[0] > n:
        xi = xi[np.sort(rng.choice(xi.shape[0], n, replace=False))]
    elif xj.shape[0] > n:
        xj = xj[np.sort(rng.choice(xj.shape[0], n, replace=False))]
    pool = np.vstack([xi, xj])
    pseudo = np.concatenate([np.zeros(n, dtype=np.int64), np.ones(n, dtype=np.int64)])
    result = kfold_cv(pool, pseudo, folds, forest, seed=seed_int(seed, "cv", i, j))
    return result.mean


def marginal_matrix(dataset: MultiDomainDataset, forest: ForestConfig = ForestConfig(),
                    seed: int = 0, folds: int = 5, diagonal: float = 0.5,
                    store_error_rate: bool = False, threads: int = 1) -> np.ndarray:
    """Symmetric pairwise separability H.

    Off-diagonal entries are pairwise CV accuracies (or error rates when
    ``store_error_rate``); the diagonal is the fixed ``diagonal`` value,
    0.5 by default (an identical pair sits at chance).
    """
    m = dataset.n_domains
    if m < 1:
        raise ConfigurationError("dataset has no domains")
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]

    def cell(pair: tuple[int, int]) -> float:
        i, j = pair
        score = pairwise_domain_score(dataset, i, j, forest, seed=seed_int(seed, "pair", i, j),
                                      folds=folds)
        return 1.0 - score if store_error_rate else score

    values = thread_map(cell, pairs, threads)
    h = np.full((m, m), float(diagonal))
    for (i, j), v in zip(pairs, values):
        h[i, j] = h[j, i] = v
    return h


def marginal_shift(matrix: np.ndarray, config: dict | None = None) -> ShiftEstimate:
    """Frobenius norm of H divided by the domain count; lands in [0, 1]."""
    return _frobenius_estimate(matrix, "marginal", config)


def per_subject_disparity(matrix: np.ndarray) -> np.ndarray:
    """Column means of D excluding the diagonal: one value per subject.

    Answers "how far is this subject from everyone else on average". A
    single-domain matrix yields 0 by convention.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ConfigurationError(f"matrix must be square, got shape {matrix.shape}")
    m = matrix.shape[0]
    if m == 1:
        return np.zeros(1)
    return (matrix.sum(axis=0) - np.diag(matrix)) / (m - 1)
