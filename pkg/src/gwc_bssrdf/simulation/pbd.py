"""Photon Beam Diffusion reference for the multi-scattering BSSRDF.

The exit point is given in polar coordinates (r, phi) around the entry point,
phi measured from the plane of incidence.  The refracted beam travels along
depth parameter t; each point of the beam carries a dipole whose fluence and
vector-irradiance contributions are integrated over t.

Integration over t uses two stratified strategies per call, ``n_samples``
points each, on the fixed positions ``u_i = (i + 0.5) / n``:

1. exponential sampling of ``sigma_t' exp(-sigma_t' t)``;
2. equiangular sampling around the depth where the beam passes closest to the
   exit point in the surface plane, ``t* = r cos(phi) / sin(theta')``.

Both are combined with the balance heuristic.  At normal incidence the
equiangular strategy is undefined and only exponential sampling is used.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from ..core.errors import DegenerateDistanceError, InvalidParameterError
from ..core.medium import (
    DEFAULT_CONVENTION,
    DerivedConstants,
    MediumParams,
    SignConvention,
    derive_constants,
)

logger = logging.getLogger(__name__)

BUILD_SAMPLES = 100
ORACLE_SAMPLES = 10_000

# Largest (points x depth samples) block evaluated at once.
_MAX_BLOCK = 1 << 20


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BeamGeometry:
    """Incidence angle (before refraction) and polar exit coordinates."""

    theta: float
    r: float
    phi: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.theta, self.r, self.phi)):
            raise InvalidParameterError(f"non-finite beam geometry {self}")
        if self.r < 0:
            raise InvalidParameterError(f"exit radius must be >= 0, got {self.r}")
        if not 0.0 <= self.theta <= math.pi / 2:
            raise InvalidParameterError(f"theta must lie in [0, pi/2], got {self.theta}")


@dataclass
class GeomTerms:
    """Dipole geometry at beam depth t."""

    z_r: float
    z_v: float
    lambda_sq: float
    d_r: float
    d_v: float
    Q: float
    kappa: float


# ---------------------------------------------------------------------------
# Integrand
# ---------------------------------------------------------------------------

def _terms(
    consts: DerivedConstants,
    sin_p: np.ndarray,
    cos_p: np.ndarray,
    r: np.ndarray,
    cos_phi: np.ndarray,
    t: np.ndarray,
) -> tuple[np.ndarray, ...]:
    z_r = t * cos_p
    z_v = 2.0 * consts.z_b - z_r
    lambda_sq = np.maximum(r * r + t * t * sin_p * sin_p - 2.0 * r * t * sin_p * cos_phi, 0.0)
    d_r = np.sqrt(lambda_sq + z_r * z_r)
    d_v = np.sqrt(lambda_sq + z_v * z_v)
    Q = consts.rho_prime * consts.sigma_t_prime * np.exp(-consts.sigma_t_prime * t)
    kappa = 1.0 - np.exp(-2.0 * consts.sigma_t * (d_r + t))
    return z_r, z_v, lambda_sq, d_r, d_v, Q, kappa


def _integrand(
    consts: DerivedConstants,
    z_r: np.ndarray,
    z_v: np.ndarray,
    d_r: np.ndarray,
    d_v: np.ndarray,
    Q: np.ndarray,
    kappa: np.ndarray,
) -> np.ndarray:
    if np.any(d_r <= 0.0) or np.any(d_v <= 0.0):
        raise DegenerateDistanceError("exit point lies on the refracted beam")

    s = consts.sigma_tr
    e_r = np.exp(-s * d_r)
    e_v = np.exp(-s * d_v)

    fluence = consts.C_phi * consts.rho_prime / (4.0 * math.pi * consts.D) * (
        e_r / d_r - e_v / d_v
    )
    if consts.convention.flip_virtual_flux:
        virtual = -z_v
    else:
        virtual = z_r + 2.0 * consts.z_b
    flux = consts.C_E * consts.rho_prime / (4.0 * math.pi) * (
        z_r * (1.0 + s * d_r) * e_r / d_r**3 + virtual * (1.0 + s * d_v) * e_v / d_v**3
    )
    return (fluence + flux) * kappa * Q


def geometric_terms(
    consts: DerivedConstants, theta_p: float, geom: BeamGeometry, t: float
) -> GeomTerms:
    """Dipole geometry at depth *t* for the refracted angle *theta_p*."""
    if not math.isfinite(t) or t < 0:
        raise InvalidParameterError(f"beam depth must be finite and >= 0, got {t}")
    values = _terms(
        consts,
        np.float64(math.sin(theta_p)),
        np.float64(math.cos(theta_p)),
        np.float64(geom.r),
        np.float64(math.cos(geom.phi)),
        np.float64(t),
    )
    return GeomTerms(*(float(v) for v in values))


def pbd_integrand(consts: DerivedConstants, gt: GeomTerms) -> float:
    """(R_phi + R_E) * kappa * Q at one beam depth."""
    value = _integrand(
        consts,
        np.float64(gt.z_r),
        np.float64(gt.z_v),
        np.float64(gt.d_r),
        np.float64(gt.d_v),
        np.float64(gt.Q),
        np.float64(gt.kappa),
    )
    return float(value)


# ---------------------------------------------------------------------------
# Depth integration
# ---------------------------------------------------------------------------

def _integrate_block(
    consts: DerivedConstants,
    sin_p: np.ndarray,
    cos_p: np.ndarray,
    r: np.ndarray,
    cos_phi: np.ndarray,
    u: np.ndarray,
) -> np.ndarray:
    """MIS estimate for a block of points; point arrays are (P, 1), u is (n,)."""
    sig = consts.sigma_t_prime
    n = u.shape[0]

    # exponential strategy
    t_exp = np.broadcast_to(-np.log1p(-u) / sig, (sin_p.shape[0], n))

    # equiangular strategy about the closest approach in the surface plane
    with np.errstate(divide="ignore", invalid="ignore"):
        pivot = np.where(sin_p > 0.0, np.maximum(r * cos_phi / sin_p, 0.0), 0.0)
    pivot_terms = _terms(consts, sin_p, cos_p, r, cos_phi, pivot)
    h = pivot_terms[3]
    usable = (sin_p > 0.0) & (h > 1e-12)
    h = np.where(usable, h, 1.0)
    pivot = np.where(usable, pivot, 0.0)
    ang_a = np.arctan(-pivot / h)
    ang_span = 0.5 * math.pi - ang_a
    t_eq = pivot + h * np.tan(ang_a + u * ang_span)

    def pdf_exp(t: np.ndarray) -> np.ndarray:
        return sig * np.exp(-sig * t)

    def pdf_eq(t: np.ndarray) -> np.ndarray:
        dt = t - pivot
        return np.where(usable, h / (ang_span * (h * h + dt * dt)), 0.0)

    total = np.zeros(sin_p.shape[0])
    for t, is_eq in ((t_exp, False), (t_eq, True)):
        z_r, z_v, _, d_r, d_v, Q, kappa = _terms(consts, sin_p, cos_p, r, cos_phi, t)
        f = _integrand(consts, z_r, z_v, d_r, d_v, Q, kappa)
        weight = f / (pdf_exp(t) + pdf_eq(t))
        if is_eq:
            weight = np.where(usable, weight, 0.0)
        total += weight.sum(axis=1)
    return total / n


class PhotonBeamDiffusion:
    """Vectorised PBD evaluator for one material and sign convention.

    ``evaluate`` broadcasts its ``theta``, ``r`` and ``phi`` arguments and
    returns an array of the broadcast shape.
    """

    def __init__(
        self,
        params: MediumParams,
        n_samples: int = ORACLE_SAMPLES,
        convention: SignConvention = DEFAULT_CONVENTION,
    ):
        if n_samples < 1:
            raise InvalidParameterError(f"n_samples must be >= 1, got {n_samples}")
        self.params = params
        self.n_samples = n_samples
        self.convention = convention
        self.consts = derive_constants(params, convention)
        self._u = (np.arange(n_samples, dtype=np.float64) + 0.5) / n_samples

    def evaluate(self, theta: ArrayLike, r: ArrayLike, phi: ArrayLike) -> np.ndarray:
        theta_b, r_b, phi_b = np.broadcast_arrays(
            np.asarray(theta, dtype=np.float64),
            np.asarray(r, dtype=np.float64),
            np.asarray(phi, dtype=np.float64),
        )
        shape = theta_b.shape
        theta_f = theta_b.reshape(-1)
        r_f = r_b.reshape(-1)
        cos_phi = np.cos(phi_b.reshape(-1))

        sin_p = np.sin(theta_f) / self.consts.eta
        cos_p = np.sqrt(1.0 - sin_p * sin_p)

        out = np.empty(theta_f.shape[0])
        block = max(1, _MAX_BLOCK // self.n_samples)
        if out.shape[0] > block:
            logger.debug(
                "PBD: %d points x %d depth samples in blocks of %d (%s)",
                out.shape[0], self.n_samples, block, self.convention.label(),
            )
        for start in range(0, out.shape[0], block):
            sl = slice(start, start + block)
            out[sl] = _integrate_block(
                self.consts,
                sin_p[sl, None],
                cos_p[sl, None],
                r_f[sl, None],
                cos_phi[sl, None],
                self._u,
            )
        return out.reshape(shape)


def eval_sp_ms(
    params: MediumParams,
    geom: BeamGeometry,
    n_samples: int = ORACLE_SAMPLES,
    convention: SignConvention = DEFAULT_CONVENTION,
) -> float:
    """Deterministic PBD estimate of S_p^MS at one geometry."""
    oracle = PhotonBeamDiffusion(params, n_samples=n_samples, convention=convention)
    return float(oracle.evaluate(geom.theta, geom.r, geom.phi))
