"""Classifiers and cross-validation used by the shift estimators.

Two model families: a k-nearest-neighbour voter (Euclidean distance) and a
bagged random forest. Both resolve vote ties toward the smallest class
label, which keeps every prediction deterministic. Forest training is
delegated to scikit-learn; prediction re-votes over the individual trees so
the tie rule above holds exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.ensemble import RandomForestClassifier

from .errors import ConfigurationError, DegenerateModelError, DimensionMismatchError
from .utils import rng_for, seed_int


@dataclass(frozen=True)
class KnnConfig:
    """k-nearest-neighbour settings."""

    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class ForestConfig:
    """Random-forest settings. Tree count defaults to 20."""

    n_trees: int = 20

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigurationError(f"n_trees must be >= 1, got {self.n_trees}")


@dataclass
class KnnModel:
    k: int
    features: np.ndarray
    labels: np.ndarray


@dataclass
class ForestModel:
    forest: RandomForestClassifier
    classes: np.ndarray
    n_features: int
    seed: int


@dataclass
class CvResult:
    """Per-fold accuracies with their mean and population std."""

    fold_accuracies: list[float]
    mean: float
    std: float

    @classmethod
    def from_folds(cls, accs: list[float]) -> "CvResult":
        arr = np.asarray(accs, dtype=np.float64)
        return cls(list(map(float, arr)), float(arr.mean()), float(arr.std()))


def majority_vote(votes: np.ndarray, classes: np.ndarray) -> np.ndarray:
    """Per-column majority over a (n_voters, n_samples) vote matrix.

    ``classes`` must be sorted ascending; ties go to the smallest class.
    """
    counts = np.stack([(votes == c).sum(axis=0) for c in classes])
    return classes[np.argmax(counts, axis=0)]


def _check_training_set(features: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2:
        raise ConfigurationError("training features must be a 2-d array")
    if labels.shape[0] != features.shape[0]:
        raise DimensionMismatchError("labels and features disagree in length")
    if features.shape[0] == 0:
        raise ConfigurationError("training set is empty")
    return features, labels


def knn_fit(features: np.ndarray, labels: np.ndarray, k: int = 1) -> KnnModel:
    """Store the training set; requires k <= number of rows."""
    features, labels = _check_training_set(features, labels)
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if k > features.shape[0]:
        raise ConfigurationError(f"k={k} exceeds the {features.shape[0]} training rows")
    return KnnModel(k=k, features=features, labels=labels)


def knn_predict(model: KnnModel, features: np.ndarray) -> np.ndarray:
    """Majority label among the k nearest training rows (Euclidean).

    Neighbour ranking uses a stable sort, so equidistant neighbours are
    taken in training order; label ties go to the smallest label.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.features.shape[1]:
        raise DimensionMismatchError(
            f"query dimension {features.shape[-1] if features.ndim == 2 else '?'} "
            f"!= model dimension {model.features.shape[1]}"
        )
    if features.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    d2 = cdist(features, model.features, metric="sqeuclidean")
    order = np.argsort(d2, axis=1, kind="stable")[:, :model.k]
    votes = model.labels[order].T  # (k, n_queries)
    classes = np.unique(model.labels)
    return majority_vote(votes, classes)


def forest_fit(features: np.ndarray, labels: np.ndarray, n_trees: int = 20,
               seed: int = 0) -> ForestModel:
    """Fit a bagged forest of ``n_trees`` Gini trees.

    Each split considers ceil(sqrt(d)) features; trees grow until leaves are
    pure or hold fewer than 2 samples. Training on a single class raises
    :class:`DegenerateModelError`. The same seed always produces the same
    forest.
    """
    features, labels = _check_training_set(features, labels)
    if n_trees < 1:
        raise ConfigurationError(f"n_trees must be >= 1, got {n_trees}")
    classes = np.unique(labels)
    if classes.shape[0] < 2:
        raise DegenerateModelError("training labels contain a single class")
    max_features = min(features.shape[1], math.ceil(math.sqrt(features.shape[1])))
    forest = RandomForestClassifier(
        n_estimators=n_trees,
        criterion="gini",
        max_features=max_features,
        bootstrap=True,
        min_samples_split=2,
        random_state=int(seed) & 0x7FFFFFFF,
        n_jobs=None,
    )
    forest.fit(features, labels)
    return ForestModel(forest=forest, classes=classes, n_features=features.shape[1],
                       seed=int(seed))


def forest_predict(model: ForestModel, features: np.ndarray) -> np.ndarray:
    """Hard majority vote over the individual trees.

    An even split (e.g. 10 vs 10 trees) goes to the smallest label.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.n_features:
        raise DimensionMismatchError(
            f"query dimension {features.shape[-1] if features.ndim == 2 else '?'} "
            f"!= model dimension {model.n_features}"
        )
    if features.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    # Trees vote in encoded class-index space; map back to the label space.
    encoded = np.stack([tree.predict(features) for tree in model.forest.estimators_])
    votes = model.forest.classes_[encoded.astype(np.int64)]
    return majority_vote(votes.astype(np.int64), model.classes)


def accuracy(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of exact label matches. Inputs must be non-empty and equal-length."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape[0] != truth.shape[0]:
        raise DimensionMismatchError(
            f"predicted has {predicted.shape[0]} labels, truth has {truth.shape[0]}"
        )
    if predicted.shape[0] == 0:
        raise ConfigurationError("cannot score an empty prediction set")
    return float(np.mean(predicted == truth))


def _stratified_folds(labels: np.ndarray, k_folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    classes, counts = np.unique(labels, return_counts=True)
    if counts.min() < k_folds:
        warnings.warn(
            f"class with {counts.min()} rows cannot be stratified into {k_folds} folds; "
            "falling back to unstratified folds",
            stacklevel=3,
        )
        perm = rng.permutation(labels.shape[0])
        return [np.sort(chunk) for chunk in np.array_split(perm, k_folds)]
    folds: list[list[np.ndarray]] = [[] for _ in range(k_folds)]
    for c in classes:
        idx = rng.permutation(np.flatnonzero(labels == c))
        for f, chunk in enumerate(np.array_split(idx, k_folds)):
            folds[f].append(chunk)
    return [np.sort(np.concatenate(parts)) for parts in folds]


def _fit_predict(train_x, train_y, test_x, config, seed: int) -> np.ndarray:
    if isinstance(config, KnnConfig):
        return knn_predict(knn_fit(train_x, train_y, config.k), test_x)
    if isinstance(config, ForestConfig):
        return forest_predict(forest_fit(train_x, train_y, config.n_trees, seed), test_x)
    raise ConfigurationError(f"unknown model config type: {type(config).__name__}")


def kfold_cv(features: np.ndarray, labels: np.ndarray, k_folds: int = 5,
             config: ForestConfig | KnnConfig = ForestConfig(), seed: int = 0) -> CvResult:
    """Stratified k-fold cross-validation accuracy.

    Class proportions per fold match the pool to within one row. If any
    class holds fewer rows than there are folds, folds are drawn without
    stratification and a warning is emitted. Deterministic in ``seed``.
    """
    features, labels = _check_training_set(features, labels)
    if k_folds < 2:
        raise ConfigurationError(f"k_folds must be >= 2, got {k_folds}")
    if features.shape[0] < k_folds:
        raise ConfigurationError(
            f"{features.shape[0]} rows cannot fill {k_folds} folds"
        )
    folds = _stratified_folds(labels, k_folds, rng_for(seed, "folds"))
    accs = []
    for f, test_idx in enumerate(folds):
        train_mask = np.ones(features.shape[0], dtype=bool)
        train_mask[test_idx] = False
        pred = _fit_predict(features[train_mask], labels[train_mask], features[test_idx],
                            config, seed_int(seed, "fold", f))
        accs.append(accuracy(pred, labels[test_idx]))
    return CvResult.from_folds(accs)
