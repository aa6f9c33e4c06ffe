"""Offline figures and summaries for zkstrip experiment artifacts."""

__version__ = "0.1.0"

from .plots import (FigureResult, FigureSpec, plot_convergence, plot_decay,
                    plot_gap_envelope, plot_lemma_table, render)
from .schemas import SchemaError, load_report, load_series
from .summary import build_summary

__all__ = [
    "__version__",
    "FigureResult", "FigureSpec", "plot_convergence", "plot_decay",
    "plot_gap_envelope", "plot_lemma_table", "render",
    "SchemaError", "load_report", "load_series",
    "build_summary",
]
