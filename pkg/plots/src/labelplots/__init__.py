"""Figure generation for label-aggregation experiment CSVs."""
from .figures import (
    FigureSpec,
    ResultFilters,
    compute_heatmap_grid,
    plot_boxplots,
    plot_significance_counts,
    plot_significance_heatmap,
    render_figure,
    significance_counts,
)
from .io import (
    PlotError,
    RESULTS_HEADER,
    SIGNIFICANCE_HEADER,
    ResultRow,
    SignificanceRow,
    read_results,
    read_significance,
)

__all__ = [
    "FigureSpec",
    "PlotError",
    "RESULTS_HEADER",
    "ResultFilters",
    "ResultRow",
    "SIGNIFICANCE_HEADER",
    "SignificanceRow",
    "compute_heatmap_grid",
    "plot_boxplots",
    "plot_significance_counts",
    "plot_significance_heatmap",
    "read_results",
    "read_significance",
    "render_figure",
    "significance_counts",
]

__version__ = "0.1.0"
