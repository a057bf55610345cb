from .wrapped_cauchy import (
    AXIS_ANCHORS,
    OPTIMIZED_ANCHORS,
    AnchorSet,
    FitResult,
    FitStatus,
    GwcParams,
    gwc_cdf,
    gwc_eval,
    gwc_fit,
    gwc_sample,
    wc_cdf,
    wc_invcdf,
    wc_pdf,
)
from .catmullrom import Grid1D, cr_weights, integrate_1d, interp_3d, sample_1d
from .table import BssrdfTable, BuildConfig, PolarSample, IncidentSample, TableGrids, build_table
from .serialization import deserialize, load, save, serialize
from .recorder import BuildRecorder

__all__ = [
    "AXIS_ANCHORS",
    "OPTIMIZED_ANCHORS",
    "AnchorSet",
    "FitResult",
    "FitStatus",
    "GwcParams",
    "gwc_cdf",
    "gwc_eval",
    "gwc_fit",
    "gwc_sample",
    "wc_cdf",
    "wc_invcdf",
    "wc_pdf",
    "Grid1D",
    "cr_weights",
    "integrate_1d",
    "interp_3d",
    "sample_1d",
    "BssrdfTable",
    "BuildConfig",
    "PolarSample",
    "IncidentSample",
    "TableGrids",
    "build_table",
    "deserialize",
    "load",
    "save",
    "serialize",
    "BuildRecorder",
]
