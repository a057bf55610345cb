"""Figure generation: oracle heatmaps, error histograms, anchor study, profile curves."""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

from ..core.errors import InvalidParameterError  # noqa: E402
from ..core.medium import DEFAULT_CONVENTION, MediumParams, SignConvention  # noqa: E402
from ..core.results import ErrorStats  # noqa: E402
from ..model.table import BssrdfTable  # noqa: E402
from ..model.wrapped_cauchy import (  # noqa: E402
    OPTIMIZED_ANCHORS,
    AnchorSet,
    FitResult,
    GwcParams,
    gwc_cdf,
    gwc_eval,
    gwc_fit,
)
from ..simulation.images import write_pfm  # noqa: E402
from ..simulation.pbd import ORACLE_SAMPLES, PhotonBeamDiffusion  # noqa: E402
from .framework import ValidationRun, sample_errors  # noqa: E402

logger = logging.getLogger(__name__)

HEATMAP_SAMPLES = 1000


# ---------------------------------------------------------------------------
# Oracle heatmap
# ---------------------------------------------------------------------------

@dataclass
class Heatmap:
    field: np.ndarray
    extent: float
    theta: float
    paths: dict[str, Path] = field(default_factory=dict)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        return plane_grid(self.extent, self.field.shape[0])

    def centroid(self) -> tuple[float, float]:
        """Centroid of the positive part of the field, in mean free paths."""
        x, y = self.coordinates()
        weight = np.maximum(self.field, 0.0)
        total = weight.sum()
        return float((weight * x).sum() / total), float((weight * y).sum() / total)


def plane_grid(extent: float, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Pixel-centre coordinates of a square image; row 0 is the top (largest y)."""
    if not extent > 0:
        raise InvalidParameterError(f"extent must be positive, got {extent}")
    if resolution < 2:
        raise InvalidParameterError(f"resolution must be at least 2, got {resolution}")
    step = extent / resolution
    axis = -0.5 * extent + (np.arange(resolution) + 0.5) * step
    x, y = np.meshgrid(axis, axis[::-1])
    return x, y


def oracle_field(
    params: MediumParams,
    theta: float,
    extent: float,
    resolution: int,
    n_samples: int = HEATMAP_SAMPLES,
    convention: SignConvention = DEFAULT_CONVENTION,
) -> np.ndarray:
    """S_p^MS over the surface plane around the entry point, beam heading along +x."""
    x, y = plane_grid(extent, resolution)
    oracle = PhotonBeamDiffusion(params, n_samples=n_samples, convention=convention)
    return oracle.evaluate(theta, np.hypot(x, y), np.arctan2(y, x))


def emit_heatmap(
    params: MediumParams,
    theta: float,
    extent: float,
    resolution: int,
    out: str | Path,
    n_samples: int = HEATMAP_SAMPLES,
    convention: SignConvention = DEFAULT_CONVENTION,
) -> Heatmap:
    """Write ``out.pfm`` (linear field) and ``out.png`` (log-scale plot)."""
    values = oracle_field(params, theta, extent, resolution, n_samples, convention)
    heatmap = Heatmap(field=values, extent=extent, theta=theta)
    stem = Path(out)
    stem.parent.mkdir(parents=True, exist_ok=True)

    heatmap.paths["pfm"] = write_pfm(stem.with_suffix(".pfm"), values)
    positive = values[values > 0]
    fig, ax = plt.subplots(figsize=(5, 4.2))
    half = 0.5 * extent
    if positive.size:
        norm = LogNorm(vmin=max(positive.min(), positive.max() * 1e-8), vmax=positive.max())
        image = ax.imshow(np.where(values > 0, values, np.nan), extent=(-half, half, -half, half),
                          norm=norm, cmap="inferno")
        fig.colorbar(image, ax=ax, label="S_p^MS")
    ax.set_xlabel("x [mfp]")
    ax.set_ylabel("y [mfp]")
    ax.set_title(f"theta = {math.degrees(theta):.0f} deg, rho = {params.albedo:.3g}")
    fig.tight_layout()
    heatmap.paths["png"] = stem.with_suffix(".png")
    fig.savefig(heatmap.paths["png"], dpi=150)
    plt.close(fig)
    logger.info("Wrote heatmap %s", heatmap.paths["png"])
    return heatmap


def compare_sign_conventions(
    params: MediumParams,
    theta: float,
    extent: float,
    resolution: int,
    n_samples: int = HEATMAP_SAMPLES,
) -> dict[str, dict[str, Any]]:
    """Heatmap diagnostics for all four dipole sign variants."""
    report: dict[str, dict[str, Any]] = {}
    for flip_zb in (False, True):
        for flip_flux in (False, True):
            convention = SignConvention(flip_zb=flip_zb, flip_virtual_flux=flip_flux)
            values = oracle_field(params, theta, extent, resolution, n_samples, convention)
            heatmap = Heatmap(field=values, extent=extent, theta=theta)
            has_mass = bool(np.any(values > 0))
            report[convention.label()] = {
                "flags": convention.flags,
                "negative_fraction": float(np.mean(values < 0)),
                "min_value": float(values.min()),
                "max_value": float(values.max()),
                "centroid": list(heatmap.centroid()) if has_mass else None,
            }
    return report


# ---------------------------------------------------------------------------
# Error histogram
# ---------------------------------------------------------------------------

@dataclass
class ErrorHistogram:
    counts: np.ndarray
    edges: np.ndarray
    stats: ErrorStats
    paths: dict[str, Path] = field(default_factory=dict)

    def mass_within(self, bound_pct: float) -> float:
        """Fraction of histogram mass whose bins lie inside ``[-bound, bound]`` percent."""
        inside = (self.edges[:-1] >= -bound_pct) & (self.edges[1:] <= bound_pct)
        return float(self.counts[inside].sum() / self.counts.sum())


def emit_error_histogram(
    table: BssrdfTable,
    rho: float,
    theta: float,
    n: int,
    bins: int,
    out: str | Path,
    seed: int = 0,
    oracle_samples: int = ORACLE_SAMPLES,
) -> ErrorHistogram:
    """Histogram of signed relative errors (percent); writes ``out.json`` and ``out.png``."""
    if bins <= 0:
        raise InvalidParameterError(f"bin count must be positive, got {bins}")
    sampled = sample_errors(table, rho, theta, ValidationRun(n=n, seed=seed, oracle_samples=oracle_samples))
    errors_pct = 100.0 * sampled.rel_errors
    bound = max(float(np.max(np.abs(errors_pct))), 1e-6)
    counts, edges = np.histogram(errors_pct, bins=bins, range=(-bound, bound))
    histogram = ErrorHistogram(counts=counts, edges=edges, stats=sampled.stats())

    stem = Path(out)
    stem.parent.mkdir(parents=True, exist_ok=True)
    histogram.paths["json"] = stem.with_suffix(".json")
    with open(histogram.paths["json"], "w") as fh:
        json.dump({
            "counts": counts.tolist(),
            "edges_pct": edges.tolist(),
            "stats": histogram.stats.to_dict(),
        }, fh, indent=2)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.stairs(counts, edges, fill=True, alpha=0.8)
    ax.set_xlabel("relative error [%]")
    ax.set_ylabel("samples")
    ax.set_title(sampled.config.label())
    fig.tight_layout()
    histogram.paths["png"] = stem.with_suffix(".png")
    fig.savefig(histogram.paths["png"], dpi=150)
    plt.close(fig)
    logger.info("Wrote error histogram %s", histogram.paths["png"])
    return histogram


# ---------------------------------------------------------------------------
# Anchor placement and profile curves
# ---------------------------------------------------------------------------

@dataclass
class AnchorStudy:
    anchors: AnchorSet
    phi: np.ndarray
    oracle: np.ndarray
    fitted: np.ndarray
    rel_error: np.ndarray
    fit: FitResult

    @property
    def max_rel_error(self) -> float:
        return float(np.max(np.abs(self.rel_error)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "anchors": list(self.anchors.cosines),
            "status": self.fit.status.value,
            "params": [self.fit.params.alpha, self.fit.params.beta, self.fit.params.c],
            "max_rel_error": self.max_rel_error,
            "mean_rel_error": float(np.mean(np.abs(self.rel_error))),
        }


def anchor_fit_error(
    params: MediumParams,
    theta: float,
    r: float,
    anchors: AnchorSet = OPTIMIZED_ANCHORS,
    n_phi: int = 181,
    n_samples: int = ORACLE_SAMPLES,
    convention: SignConvention = DEFAULT_CONVENTION,
) -> AnchorStudy:
    """Fit at *anchors* and compare the fitted profile against the oracle over [0, pi]."""
    oracle = PhotonBeamDiffusion(params, n_samples=n_samples, convention=convention)
    anchor_values = np.maximum(oracle.evaluate(theta, r, anchors.phis), 0.0)
    fit = gwc_fit(*anchor_values, anchors=anchors)
    phi = np.linspace(0.0, math.pi, n_phi)
    reference = oracle.evaluate(theta, r, phi)
    fitted = np.asarray(gwc_eval(phi, fit.params))
    return AnchorStudy(anchors, phi, reference, fitted, (fitted - reference) / reference, fit)


def emit_gwc_curves(param_sets: Iterable[GwcParams], path: str | Path, n_phi: int = 361) -> Path:
    """Plot the normalised GWC density and its cdf over [-pi, pi] for each parameter set."""
    phi = np.linspace(-math.pi, math.pi, n_phi)
    fig, (ax_pdf, ax_cdf) = plt.subplots(1, 2, figsize=(9, 3.5))
    for p in param_sets:
        label = f"a={p.alpha:.3g} b={p.beta:.3g} c={p.c:.3g}"
        ax_pdf.plot(phi, np.asarray(gwc_eval(phi, p)) / p.total_mass, label=label)
        ax_cdf.plot(phi, gwc_cdf(phi, p), label=label)
    ax_pdf.set_xlabel("phi")
    ax_pdf.set_ylabel("density")
    ax_cdf.set_xlabel("phi")
    ax_cdf.set_ylabel("cdf")
    ax_pdf.legend(fontsize=7)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
