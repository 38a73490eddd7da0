"""Quantify conditional and marginal statistical shift across labeled domains.

The package measures two things on a collection of labeled feature domains
(for example one domain per subject in a physiological study): how much the
label-given-feature rule moves between domains (conditional shift, via
pairwise cross-classifier disagreement) and how distinguishable the feature
marginals are (marginal shift, via pairwise domain classifiers). Both reduce
to [0, 1] magnitudes that can be compared across normalization schemes and
related to leave-one-subject-out generalization gaps.
"""

from .classify import (
    CvResult,
    ForestConfig,
    KnnConfig,
    accuracy,
    forest_fit,
    forest_predict,
    kfold_cv,
    knn_fit,
    knn_predict,
)
from .config import ExperimentConfig, resolve_config
from .domains import (
    DomainSpec,
    MultiDomainDataset,
    OracleTruth,
    affine_distort,
    dataset_to_table,
    generate_domains,
    load_scenario,
    oracle_truth,
    true_disagreement,
)
from .errors import ShiftLabError
from .evaluate import (
    LosoResult,
    LosoSplit,
    ReportSet,
    generalization_gap,
    loso_split,
    repeat_experiment,
    run_loso,
    subsample_task_rows,
)
from .features import FeatureTable, concat_tables, read_features_csv, write_features_csv
from .normalize import (
    NormScheme,
    NormStats,
    apply_normalization,
    compute_all_stats,
    compute_norm_stats,
    normalize_table,
)
from .shift import (
    ShiftEstimate,
    conditional_shift,
    disparity_matrix,
    estimate_mu,
    marginal_matrix,
    marginal_shift,
    pairwise_domain_score,
    per_subject_disparity,
    table_to_dataset,
)
from .signal import (
    DEFAULT_BANDS,
    BandSpec,
    EpochSet,
    RawRecording,
    Segment,
    SyntheticEegConfig,
    band_power_features,
    bandpass_filter,
    downsample,
    epoch,
    generate_synthetic_eeg,
    load_recording,
    parse_bands,
    save_recording,
)

__version__ = "0.1.0"

__all__ = [
    "BandSpec", "CvResult", "DEFAULT_BANDS", "DomainSpec", "EpochSet",
    "ExperimentConfig", "FeatureTable", "ForestConfig", "KnnConfig", "LosoResult",
    "LosoSplit", "MultiDomainDataset", "NormScheme", "NormStats", "OracleTruth",
    "RawRecording", "ReportSet", "Segment", "ShiftEstimate", "ShiftLabError",
    "SyntheticEegConfig", "accuracy", "affine_distort", "apply_normalization",
    "band_power_features", "bandpass_filter", "compute_all_stats",
    "compute_norm_stats", "concat_tables", "conditional_shift", "dataset_to_table",
    "disparity_matrix", "downsample", "epoch", "estimate_mu", "forest_fit",
    "forest_predict", "generalization_gap", "generate_domains",
    "generate_synthetic_eeg", "kfold_cv", "knn_fit", "knn_predict",
    "load_recording", "load_scenario", "loso_split", "marginal_matrix",
    "marginal_shift", "normalize_table", "oracle_truth", "pairwise_domain_score",
    "parse_bands", "per_subject_disparity", "read_features_csv", "repeat_experiment",
    "resolve_config", "run_loso", "save_recording", "subsample_task_rows",
    "table_to_dataset", "true_disagreement", "write_features_csv",
]
