from .errors import (
    BssrdfError,
    ConvergenceError,
    CorruptHeaderError,
    DegenerateDistanceError,
    DimensionMismatchError,
    InvalidParameterError,
    InvariantViolationError,
    OutOfDomainError,
    SceneConfigError,
    TableFormatError,
    ZeroMassError,
)
from .medium import (
    DEFAULT_CONVENTION,
    VERBATIM,
    DerivedConstants,
    MediumParams,
    SignConvention,
    derive_constants,
    fresnel_moment,
    fresnel_reflectance,
    refract_cos,
)
from .results import BuildStats, ErrorStats, ValidationConfig
from .rng import uniform_block

__all__ = [
    "BssrdfError",
    "ConvergenceError",
    "CorruptHeaderError",
    "DegenerateDistanceError",
    "DimensionMismatchError",
    "InvalidParameterError",
    "InvariantViolationError",
    "OutOfDomainError",
    "SceneConfigError",
    "TableFormatError",
    "ZeroMassError",
    "DEFAULT_CONVENTION",
    "VERBATIM",
    "DerivedConstants",
    "MediumParams",
    "SignConvention",
    "derive_constants",
    "fresnel_moment",
    "fresnel_reflectance",
    "refract_cos",
    "BuildStats",
    "ErrorStats",
    "ValidationConfig",
    "uniform_block",
]
