"""The three figure types, rendered to SVG.

Styling defaults (nothing about them is configurable on purpose):

- SVG with a fixed hash salt and no embedded date, so identical inputs
  render byte-identical files;
- text kept as text (``svg.fonttype = none``) for small, diffable output;
- a fixed color per normalization scheme; viridis over [0, 1] for matrices.
"""

from __future__ import annotations

import warnings

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .io import (
    PlotInputError,
    ordered_schemes,
    read_matrix,
    read_runs,
    read_subject_bars,
)

GLOBAL_METRICS = ("conditional_shift", "marginal_shift")
SUBJECT_METRICS = ("train_acc", "test_acc", "gap")

SCHEME_COLORS = {
    "none": "#888888",
    "whitening": "#1f77b4",
    "baseline1": "#2ca02c",
    "baseline2": "#d62728",
}
FALLBACK_COLORS = ("#9467bd", "#8c564b", "#e377c2", "#bcbd22")

METRIC_LABELS = {
    "conditional_shift": "conditional shift",
    "marginal_shift": "marginal shift",
    "train_acc": "training accuracy",
    "test_acc": "left-out accuracy",
    "gap": "generalization gap",
}


def _apply_style() -> None:
    plt.rcParams.update({
        "svg.hashsalt": "shiftplots",
        "svg.fonttype": "none",
        "figure.dpi": 100,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "axes.axisbelow": True,
    })


def _save(fig, out_path: str) -> None:
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _scheme_color(scheme: str, fallback_index: int) -> str:
    return SCHEME_COLORS.get(
        scheme, FALLBACK_COLORS[fallback_index % len(FALLBACK_COLORS)])


def _styled_box(ax, data, positions, color):
    box = ax.boxplot(data, positions=positions, widths=0.6, patch_artist=True,
                     medianprops={"color": "black"})
    for patch in box["boxes"]:
        patch.set_facecolor(color)
        patch.set_alpha(0.6)
    return box


def plot_boxplots(in_path: str, metric: str, out_path: str) -> str:
    """Boxplots of a runs-file metric.

    Global metrics draw one box per scheme over repetitions; per-subject
    metrics draw one box per subject, grouped side by side per scheme.
    """
    if metric not in GLOBAL_METRICS + SUBJECT_METRICS:
        raise PlotInputError(
            f"unknown metric {metric!r}; expected one of "
            f"{', '.join(GLOBAL_METRICS + SUBJECT_METRICS)}")
    runs = read_runs(in_path)
    if metric not in runs.metrics():
        raise PlotInputError(f"{in_path}: no rows for metric {metric!r}")
    schemes = [s for s in runs.schemes() if runs.values(metric, s).size]

    _apply_style()
    if metric in GLOBAL_METRICS:
        fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(schemes), 3.2))
        for i, scheme in enumerate(schemes):
            _styled_box(ax, [runs.values(metric, scheme)], [i],
                        _scheme_color(scheme, i))
        ax.set_xticks(range(len(schemes)))
        ax.set_xticklabels(schemes, rotation=20)
        ax.set_ylim(-0.02, 1.02)
    else:
        subjects = runs.subjects(metric)
        width = len(schemes) + 1
        fig, ax = plt.subplots(figsize=(1.5 + 0.45 * width * len(subjects), 3.2))
        for i, scheme in enumerate(schemes):
            positions = [g * width + i for g in range(len(subjects))]
            data = [runs.values(metric, scheme, subject=s) for s in subjects]
            _styled_box(ax, data, positions, _scheme_color(scheme, i))
        centers = [g * width + (len(schemes) - 1) / 2 for g in range(len(subjects))]
        ax.set_xticks(centers)
        ax.set_xticklabels([f"S{s}" for s in subjects])
        ax.set_ylim(-0.02, 1.02)
        handles = [plt.Rectangle((0, 0), 1, 1, facecolor=_scheme_color(s, i),
                                 alpha=0.6) for i, s in enumerate(schemes)]
        ax.legend(handles, schemes, loc="upper right", fontsize=7)
    ax.set_ylabel(METRIC_LABELS[metric])
    fig.tight_layout()
    _save(fig, out_path)
    return out_path


def plot_matrix_heatmap(in_path: str, out_path: str) -> str:
    """Heatmap of a square matrix file on a fixed [0, 1] color scale."""
    matrix, subjects = read_matrix(in_path)
    labels = subjects if subjects is not None else [str(i) for i in
                                                    range(matrix.shape[0])]
    _apply_style()
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    ax.grid(False)
    image = ax.imshow(matrix, cmap="viridis", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(matrix.shape[0]))
    ax.set_yticks(range(matrix.shape[0]))
    ax.set_xticklabels(labels)
    ax.set_yticklabels(labels)
    ax.set_xlabel("subject")
    ax.set_ylabel("subject")
    fig.colorbar(image, ax=ax, fraction=0.046)
    fig.tight_layout()
    _save(fig, out_path)
    return out_path


def plot_subject_bars(in_path: str, out_path: str) -> str:
    """Grouped bars of per-subject values, one bar per scheme within a group.

    Values are expected in [0, 1]; anything outside renders as-is but emits
    a warning.
    """
    rows = read_subject_bars(in_path)
    bad = [r for r in rows if not 0.0 <= r["value"] <= 1.0]
    if bad:
        warnings.warn(
            f"{in_path}: {len(bad)} value(s) outside [0, 1]", stacklevel=2)
    schemes = ordered_schemes({r["scheme"] for r in rows})
    subjects: list[str] = []
    for r in rows:
        if r["subject"] not in subjects:
            subjects.append(r["subject"])
    by_key = {(r["subject"], r["scheme"]): r["value"] for r in rows}

    _apply_style()
    width = 0.8 / len(schemes)
    fig, ax = plt.subplots(figsize=(1.5 + 0.6 * len(subjects), 3.2))
    for i, scheme in enumerate(schemes):
        xs = [g + i * width for g in range(len(subjects))]
        ys = [by_key.get((s, scheme), 0.0) for s in subjects]
        ax.bar(xs, ys, width=width, color=_scheme_color(scheme, i),
               alpha=0.8, label=scheme)
    ax.set_xticks([g + 0.4 - width / 2 for g in range(len(subjects))])
    ax.set_xticklabels([f"S{s}" for s in subjects])
    ax.set_ylabel("average disparity")
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, out_path)
    return out_path
