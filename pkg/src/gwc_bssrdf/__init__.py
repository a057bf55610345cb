"""
GWC BSSRDF
==========

Tabulated General Wrapped Cauchy model of the multiple-scattering BSSRDF,
fitted to a Photon Beam Diffusion reference, with evaluation, importance
sampling and a validation harness.

Quick start::

    from gwc_bssrdf import build_table, validate

    table = build_table(eta=1.33, g=0.0)
    value = table.evaluate(rho=0.9, theta=1.0, r=1.0, phi=0.0)
    stats = validate(table, rho=0.9, theta=1.0, n=10_000)
"""

from .core.errors import BssrdfError, InvalidParameterError, OutOfDomainError, ZeroMassError
from .core.medium import MediumParams, SignConvention, derive_constants
from .core.results import BuildStats, ErrorStats, ValidationConfig

from .simulation.pbd import BeamGeometry, PhotonBeamDiffusion, eval_sp_ms
from .simulation.scene import SlabScene, load_scene

from .model.wrapped_cauchy import OPTIMIZED_ANCHORS, AXIS_ANCHORS, GwcParams, gwc_fit
from .model.table import BssrdfTable, BuildConfig, TableGrids, build_table
from .model.serialization import load, save

from .simulation.tracer import trace_beam

from .evaluation.framework import ValidationFramework, validate
from .evaluation.figures import emit_error_histogram, emit_heatmap

from .reporting.html_report import HTMLReportGenerator
from .reporting.junit import JUnitXMLWriter
from .reporting.targets import TargetChecker

__version__ = "0.1.0"

__all__ = [
    # Core
    "BssrdfError",
    "InvalidParameterError",
    "OutOfDomainError",
    "ZeroMassError",
    "MediumParams",
    "SignConvention",
    "derive_constants",
    "BuildStats",
    "ErrorStats",
    "ValidationConfig",
    # Simulation
    "BeamGeometry",
    "PhotonBeamDiffusion",
    "eval_sp_ms",
    "SlabScene",
    "load_scene",
    "trace_beam",
    # Model
    "OPTIMIZED_ANCHORS",
    "AXIS_ANCHORS",
    "GwcParams",
    "gwc_fit",
    "BssrdfTable",
    "BuildConfig",
    "TableGrids",
    "build_table",
    "load",
    "save",
    # Evaluation
    "ValidationFramework",
    "validate",
    "emit_error_histogram",
    "emit_heatmap",
    # Reporting
    "HTMLReportGenerator",
    "JUnitXMLWriter",
    "TargetChecker",
]
