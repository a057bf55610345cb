"""Result records: table build statistics and model-vs-oracle error summaries."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike


@dataclass(frozen=True)
class ValidationConfig:
    """Where a validation run was taken."""

    rho: float
    theta: float
    eta: float
    g: float

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)

    def label(self) -> str:
        return f"rho={self.rho:g} theta={self.theta_deg:.0f}deg"


@dataclass
class ErrorStats:
    """Relative error of the table against the oracle, in percent."""

    mean_rel_error: float
    p50: float
    p95: float
    p99: float
    n_samples: int
    config: ValidationConfig
    excluded: int = 0
    max_rel_error: float = 0.0
    model: str = "table"

    @classmethod
    def from_errors(
        cls,
        rel_errors: ArrayLike,
        config: ValidationConfig,
        excluded: int = 0,
        model: str = "table",
    ) -> ErrorStats:
        """Summarise signed relative errors (fractions, not percent)."""
        magnitude = np.abs(np.asarray(rel_errors, dtype=np.float64)) * 100.0
        if magnitude.size == 0:
            raise ValueError("no samples left to summarise")
        p50, p95, p99 = np.percentile(magnitude, [50.0, 95.0, 99.0])
        return cls(
            mean_rel_error=float(magnitude.mean()),
            p50=float(p50),
            p95=float(p95),
            p99=float(p99),
            n_samples=int(magnitude.size),
            config=config,
            excluded=excluded,
            max_rel_error=float(magnitude.max()),
            model=model,
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class BuildStats:
    """Fit and consistency diagnostics gathered while building a table."""

    total_cells: int = 0
    clamped_cells: int = 0
    degenerate_cells: int = 0
    complex_root_cells: int = 0
    negative_oracle_values: int = 0
    rho_eff_above_one: int = 0
    rho_eff_unphysical: int = 0
    rho_eff_monotonicity_violations: int = 0
    interpolation_discrepancies: int = 0
    discrepancy_checks: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def clamp_rate(self) -> float:
        if not self.total_cells:
            return 0.0
        return (self.clamped_cells + self.complex_root_cells) / self.total_cells

    @property
    def discrepancy_rate(self) -> float:
        if not self.discrepancy_checks:
            return 0.0
        return self.interpolation_discrepancies / self.discrepancy_checks

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["clamp_rate"] = self.clamp_rate
        data["discrepancy_rate"] = self.discrepancy_rate
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> BuildStats:
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)
