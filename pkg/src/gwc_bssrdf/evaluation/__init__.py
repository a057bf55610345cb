from .framework import ValidationFramework, ValidationRun, sample_errors, validate
from .accuracy import RelativeErrorScorer
from .figures import (
    anchor_fit_error,
    compare_sign_conventions,
    emit_error_histogram,
    emit_gwc_curves,
    emit_heatmap,
)

__all__ = [
    "ValidationFramework",
    "ValidationRun",
    "sample_errors",
    "validate",
    "RelativeErrorScorer",
    "anchor_fit_error",
    "compare_sign_conventions",
    "emit_error_histogram",
    "emit_gwc_curves",
    "emit_heatmap",
]
