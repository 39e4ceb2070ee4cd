"""GAF-based source selection for stock-price transfer learning."""

from .gaf import gasf, gasf_from_series, gaf_to_image
from .pipeline import ExperimentConfig, render_report, run_experiment, run_grid
from .selection import select_cross_pool, select_multi, select_single
from .similarity import SimilaritySpec, evaluate

__all__ = [
    "ExperimentConfig",
    "SimilaritySpec",
    "evaluate",
    "gaf_to_image",
    "gasf",
    "gasf_from_series",
    "render_report",
    "run_experiment",
    "run_grid",
    "select_cross_pool",
    "select_multi",
    "select_single",
]
