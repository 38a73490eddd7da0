"""SVG figure scripts for shift-study CSV outputs."""

from .io import (
    PlotInputError,
    RunsData,
    read_matrix,
    read_runs,
    read_subject_bars,
)
from .render import (
    plot_boxplots,
    plot_matrix_heatmap,
    plot_subject_bars,
)

__version__ = "0.1.0"

__all__ = [
    "PlotInputError",
    "RunsData",
    "read_matrix",
    "read_runs",
    "read_subject_bars",
    "plot_boxplots",
    "plot_matrix_heatmap",
    "plot_subject_bars",
    "__version__",
]
