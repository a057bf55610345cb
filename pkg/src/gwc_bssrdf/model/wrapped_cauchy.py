"""Wrapped Cauchy and General Wrapped Cauchy (GWC) angular profiles.

A GWC profile is a uniform pedestal plus a weighted Wrapped Cauchy lobe::

    f(phi) = alpha + beta * pdf_WC(phi; c)

Its integral over [-pi, pi] is ``2 pi alpha + beta``; multiplied by the exit
radius this is the radial energy E of the profile.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from ..core.errors import InvalidParameterError
from .solvers import newton_bisection

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
C_MAX = 1.0 - 1e-6


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GwcParams:
    """Pedestal ``alpha``, lobe weight ``beta`` and concentration ``c``."""

    alpha: float
    beta: float
    c: float

    @property
    def total_mass(self) -> float:
        return TWO_PI * self.alpha + self.beta

    def is_valid(self) -> bool:
        return self.alpha >= 0 and self.beta >= 0 and 0 <= self.c < 1 and self.total_mass > 0


@dataclass(frozen=True)
class AnchorSet:
    """Cosines of the three azimuths at which a profile is sampled for fitting."""

    cos_phi_1: float
    cos_phi_2: float
    cos_phi_3: float

    def __post_init__(self) -> None:
        cosines = self.cosines
        if not all(-1.0 <= x <= 1.0 for x in cosines):
            raise InvalidParameterError(f"anchor cosines must lie in [-1, 1]: {cosines}")
        if not cosines[0] > cosines[1] > cosines[2]:
            raise InvalidParameterError(f"anchor cosines must strictly decrease: {cosines}")

    @property
    def cosines(self) -> tuple[float, float, float]:
        return (self.cos_phi_1, self.cos_phi_2, self.cos_phi_3)

    @property
    def phis(self) -> np.ndarray:
        return np.arccos(np.array(self.cosines))


OPTIMIZED_ANCHORS = AnchorSet(0.9530, 0.4050, -0.7527)
AXIS_ANCHORS = AnchorSet(1.0, 0.0, -1.0)


class FitStatus(str, enum.Enum):
    OK = "ok"
    DEGENERATE = "degenerate"
    CLAMPED = "clamped"
    COMPLEX_ROOT = "complex_root"

    @property
    def code(self) -> int:
        return list(FitStatus).index(self)


@dataclass(frozen=True)
class FitResult:
    params: GwcParams
    status: FitStatus = FitStatus.OK

    @property
    def clamped(self) -> bool:
        return self.status in (FitStatus.CLAMPED, FitStatus.COMPLEX_ROOT)


# ---------------------------------------------------------------------------
# Wrapped Cauchy
# ---------------------------------------------------------------------------

def _scalar_or_array(x: np.ndarray) -> np.ndarray | float:
    return x[()] if x.ndim == 0 else x


def wc_pdf(phi: ArrayLike, c: ArrayLike) -> np.ndarray | float:
    phi = np.asarray(phi, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    value = (1.0 - c * c) / (TWO_PI * (1.0 + c * c - 2.0 * c * np.cos(phi)))
    return _scalar_or_array(value)


def wc_cdf(phi: ArrayLike, c: ArrayLike) -> np.ndarray | float:
    phi = np.asarray(phi, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    ratio = (1.0 + c) / (1.0 - c)
    value = 0.5 + np.arctan(ratio * np.tan(0.5 * phi)) / math.pi
    value = np.where(phi >= math.pi, 1.0, np.where(phi <= -math.pi, 0.0, value))
    return _scalar_or_array(value)


def wc_invcdf(u: ArrayLike, c: ArrayLike) -> np.ndarray | float:
    u = np.asarray(u, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    ratio = (1.0 - c) / (1.0 + c)
    value = 2.0 * np.arctan(ratio * np.tan(math.pi * (u - 0.5)))
    value = np.where(u >= 1.0, math.pi, np.where(u <= 0.0, -math.pi, value))
    return _scalar_or_array(value)


# ---------------------------------------------------------------------------
# General Wrapped Cauchy
# ---------------------------------------------------------------------------

def gwc_eval(phi: ArrayLike, p: GwcParams) -> np.ndarray | float:
    return p.alpha + p.beta * wc_pdf(phi, p.c)


def _gwc_cdf(phi: np.ndarray, alpha: np.ndarray, beta: np.ndarray, c: np.ndarray) -> np.ndarray:
    mass = TWO_PI * alpha + beta
    return (alpha * (phi + math.pi) + beta * wc_cdf(phi, c)) / mass


def gwc_cdf(phi: ArrayLike, p: GwcParams) -> np.ndarray | float:
    if p.total_mass <= 0:
        raise InvalidParameterError("GWC profile has zero total mass")
    value = _gwc_cdf(np.asarray(phi, dtype=np.float64), p.alpha, p.beta, p.c)
    return _scalar_or_array(np.asarray(value))


def gwc_sample_batch(
    u: ArrayLike, alpha: ArrayLike, beta: ArrayLike, c: ArrayLike
) -> np.ndarray:
    """Invert the GWC cdf element-wise; parameters broadcast against *u*."""
    u, alpha, beta, c = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.float64) for v in (u, alpha, beta, c))
    )
    if np.any(TWO_PI * alpha + beta <= 0):
        raise InvalidParameterError("GWC profile has zero total mass")
    mass = TWO_PI * alpha + beta

    return newton_bisection(
        lambda x: _gwc_cdf(x, alpha, beta, c) - u,
        lambda x: (alpha + beta * wc_pdf(x, c)) / mass,
        wc_invcdf(u, c),
        -math.pi,
        math.pi,
    )


def gwc_sample(u: float, p: GwcParams) -> float:
    """Draw phi with ``gwc_cdf(phi) = u``, starting from the pure lobe inverse."""
    return float(gwc_sample_batch(u, p.alpha, p.beta, p.c))


# ---------------------------------------------------------------------------
# Energy relation
# ---------------------------------------------------------------------------

def energy_from_params(p: GwcParams, r: float) -> float:
    return p.total_mass * r


def alpha_from_energy(energy: float, beta: float, r: float) -> float:
    if r == 0:
        raise InvalidParameterError("alpha is undetermined by the energy at r = 0")
    return (energy / r - beta) / TWO_PI


# ---------------------------------------------------------------------------
# Three-anchor fit
# ---------------------------------------------------------------------------

def _clamp_preserving_mean(
    alpha: float, beta: float, c: float, f: tuple[float, float, float], anchors: AnchorSet
) -> GwcParams:
    c = min(max(c, 0.0), C_MAX) if math.isfinite(c) else 0.0
    alpha = max(alpha, 0.0) if math.isfinite(alpha) else 0.0
    beta = max(beta, 0.0) if math.isfinite(beta) else 0.0

    target = sum(f) / 3.0
    lobe_mean = float(np.mean(wc_pdf(anchors.phis, c)))
    beta = (target - alpha) / lobe_mean
    if beta < 0.0:
        beta, alpha = 0.0, target
    return GwcParams(alpha=alpha, beta=beta, c=c)


def gwc_fit(f1: float, f2: float, f3: float, anchors: AnchorSet = OPTIMIZED_ANCHORS) -> FitResult:
    """Closed-form GWC parameters reproducing three anchor values.

    Solutions outside ``alpha >= 0, beta >= 0, 0 <= c < 1`` are clamped and
    flagged; the clamp keeps the mean of the three anchor values.
    """
    f = (f1, f2, f3)
    if not all(math.isfinite(v) and v >= 0.0 for v in f):
        raise InvalidParameterError(f"anchor values must be finite and >= 0, got {f}")

    x1, x2, x3 = anchors.cosines
    degenerate = GwcParams(alpha=0.0, beta=TWO_PI * f1, c=0.0)
    if abs(f2 - f3) <= 1e-9 * max(f1, 1.0):
        return FitResult(degenerate, FitStatus.DEGENERATE)

    k = (x1 - x2) / (x2 - x3)
    K = (f1 - f2) / (f2 - f3)
    if abs(K - k) <= 1e-12 * max(abs(K), abs(k), 1.0):
        return FitResult(degenerate, FitStatus.DEGENERATE)

    a = (K * x1 - k * x3) / (K - k)
    if a * a < 1.0:
        logger.debug("no real concentration for anchors %s (a=%g)", f, a)
        mean = sum(f) / 3.0
        return FitResult(GwcParams(alpha=0.0, beta=TWO_PI * mean, c=0.0), FitStatus.COMPLEX_ROOT)

    b = math.sqrt(a * a - 1.0)
    c = a - b
    if b > 0.0:
        beta = TWO_PI * (f1 - f3) / b / (1.0 / (a - x1) - 1.0 / (a - x3))
        alpha = f1 - beta * b / (TWO_PI * (a - x1))
    else:
        alpha = beta = math.nan

    if 0.0 <= c < 1.0 and alpha >= 0.0 and beta >= 0.0:
        return FitResult(GwcParams(alpha=alpha, beta=beta, c=c))

    logger.debug("clamping GWC fit alpha=%g beta=%g c=%g", alpha, beta, c)
    return FitResult(_clamp_preserving_mean(alpha, beta, c, f, anchors), FitStatus.CLAMPED)
