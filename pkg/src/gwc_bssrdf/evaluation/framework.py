"""Model-vs-oracle validation over importance-sampled exit points."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..core.errors import InvalidParameterError
from ..core.medium import MediumParams, SignConvention
from ..core.results import ErrorStats, ValidationConfig
from ..core.rng import chunks, uniform_block
from ..model.table import BssrdfTable
from ..simulation.pbd import ORACLE_SAMPLES, PhotonBeamDiffusion
from .accuracy import ORACLE_FLOOR, RelativeErrorScorer

logger = logging.getLogger(__name__)

MODELS = ("table", "perpendicular")

# (rho, theta in degrees) pairs of the published accuracy study.
REFERENCE_CONFIGS: tuple[tuple[float, float], ...] = tuple(
    (rho, theta) for rho in (0.5, 0.9, 0.99) for theta in (0.0, 60.0, 89.0)
)


@dataclass
class ValidationRun:
    """Settings of one validation sweep."""

    n: int = 100_000
    seed: int = 0
    oracle_samples: int = ORACLE_SAMPLES
    chunk_size: int = 4096
    floor: float = ORACLE_FLOOR
    model: str = "table"

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise InvalidParameterError(f"sample count must be positive, got {self.n}")
        if self.model not in MODELS:
            raise InvalidParameterError(f"model must be one of {MODELS}, got '{self.model}'")
        if self.chunk_size <= 0 or self.oracle_samples <= 0:
            raise InvalidParameterError("chunk size and oracle samples must be positive")


@dataclass
class SampledErrors:
    """Per-point signed relative errors plus the sampled coordinates."""

    config: ValidationConfig
    r: np.ndarray
    phi: np.ndarray
    model: np.ndarray
    oracle: np.ndarray
    rel_errors: np.ndarray
    excluded: int = 0
    run: ValidationRun = field(default_factory=ValidationRun)

    def stats(self) -> ErrorStats:
        return ErrorStats.from_errors(self.rel_errors, self.config, self.excluded, model=self.run.model)


def sample_errors(
    table: BssrdfTable,
    rho: float,
    theta: float,
    run: ValidationRun | None = None,
    convention: SignConvention | None = None,
) -> SampledErrors:
    """Draw ``run.n`` exit points with the table sampler and compare against the oracle."""
    run = run or ValidationRun()
    if convention is not None and convention != table.convention:
        raise InvalidParameterError(
            f"table built with {table.convention.label()}, oracle requested with {convention.label()}"
        )
    config = ValidationConfig(rho=rho, theta=theta, eta=table.eta, g=table.g)
    oracle = PhotonBeamDiffusion(
        MediumParams.from_albedo(table.eta, table.g, rho),
        n_samples=run.oracle_samples,
        convention=table.convention,
    )

    r = np.empty(run.n)
    phi = np.empty(run.n)
    for start, count in chunks(run.n, run.chunk_size):
        u = uniform_block(run.seed, start, count)
        sl = slice(start, start + count)
        r[sl], phi[sl], _ = table.sample_exit_batch(rho, theta, u[:, 0], u[:, 1])

    if run.model == "perpendicular":
        model = np.asarray(table.evaluate_perpendicular(rho, r, phi))
    else:
        model = np.asarray(table.evaluate(rho, theta, r, phi))
    reference = np.empty(run.n)
    for start, count in chunks(run.n, run.chunk_size):
        sl = slice(start, start + count)
        reference[sl] = oracle.evaluate(theta, r[sl], phi[sl])

    rel_errors, excluded = RelativeErrorScorer(run.floor).score(model, reference)
    if excluded:
        logger.info("%s: %d points below the oracle floor excluded", config.label(), excluded)
    return SampledErrors(config, r, phi, model, reference, rel_errors, excluded, run)


def validate(
    table: BssrdfTable,
    rho: float,
    theta: float,
    n: int = 100_000,
    seed: int = 0,
    oracle_samples: int = ORACLE_SAMPLES,
    model: str = "table",
    convention: SignConvention | None = None,
) -> ErrorStats:
    """Mean and percentile relative errors (percent) of the model at one (rho, theta)."""
    run = ValidationRun(n=n, seed=seed, oracle_samples=oracle_samples, model=model)
    stats = sample_errors(table, rho, theta, run, convention).stats()
    logger.info(
        "%s [%s]: mean %.4f%%, p95 %.4f%%, p99 %.4f%% over %d points",
        stats.config.label(), model, stats.mean_rel_error, stats.p95, stats.p99, stats.n_samples,
    )
    return stats


class ValidationFramework:
    """
    Validate one table over a list of (rho, theta) configurations.

    Every configuration reuses the same seed, so each is reproducible on its
    own regardless of which others run alongside it.
    """

    def __init__(self, table: BssrdfTable, run: ValidationRun | None = None):
        self.table = table
        self.run = run or ValidationRun()

    def evaluate(
        self, configs: tuple[tuple[float, float], ...] = REFERENCE_CONFIGS
    ) -> list[ErrorStats]:
        """Run every configuration; *configs* holds (rho, theta in degrees) pairs."""
        results = []
        for rho, theta_deg in configs:
            stats = sample_errors(self.table, rho, math.radians(theta_deg), self.run).stats()
            results.append(stats)
        return results
