"""Tabulated GWC model of the multi-scattering BSSRDF over (albedo, incidence, radius).

Each cell stores ``A = E / r = 2 pi alpha + beta`` together with ``beta`` and
``c``.  Storing A instead of E keeps evaluation regular at r = 0; the radial
energy is recovered as ``E(r) = A(r) r`` wherever it is needed.

All lengths are in mean free paths (sigma_t = 1).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike

from ..core.errors import InvalidParameterError, OutOfDomainError, ZeroMassError
from ..core.medium import DEFAULT_CONVENTION, MediumParams, SignConvention
from ..core.results import BuildStats
from ..simulation.pbd import BUILD_SAMPLES, PhotonBeamDiffusion
from .catmullrom import (
    Grid1D,
    cr_weights_batch,
    eval_1d,
    integrate_1d,
    interp_nd,
    negative_lobes,
    sample_1d_batch,
)
from .recorder import BuildRecorder
from .wrapped_cauchy import (
    C_MAX,
    OPTIMIZED_ANCHORS,
    TWO_PI,
    AnchorSet,
    FitStatus,
    gwc_fit,
    gwc_sample_batch,
    wc_pdf,
)

logger = logging.getLogger(__name__)

# Oracle radius used for the angular fit of the r = 0 column.
R_ZERO_SUBSTITUTE = 1e-4
RHO_EFF_TOLERANCE = 0.05
CLAMPED_MASS_WARNING = 1e-6


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TableGrids:
    rho: Grid1D
    theta: Grid1D
    r: Grid1D

    @classmethod
    def build(
        cls,
        n_rho: int = 100,
        n_theta: int = 10,
        n_r: int = 64,
        r_first: float = 0.0025,
        r_growth: float = 1.2,
    ) -> TableGrids:
        """Exponentially spaced albedos, uniform incidence in [0, pi/2], geometric radii from 0."""
        i = np.arange(n_rho, dtype=np.float64)
        rho = (1.0 - np.exp(-8.0 * i / (n_rho - 1))) / (1.0 - math.exp(-8.0))
        theta = np.arange(n_theta, dtype=np.float64) * (0.5 * math.pi / (n_theta - 1))
        r = np.zeros(n_r)
        r[1:] = r_first * r_growth ** np.arange(1, n_r, dtype=np.float64)
        return cls(rho=Grid1D(rho), theta=Grid1D(theta), r=Grid1D(r))

    @classmethod
    def from_arrays(cls, rho: ArrayLike, theta: ArrayLike, r: ArrayLike) -> TableGrids:
        return cls(rho=Grid1D(np.asarray(rho)), theta=Grid1D(np.asarray(theta)), r=Grid1D(np.asarray(r)))

    @property
    def shape(self) -> tuple[int, int, int]:
        return (len(self.rho), len(self.theta), len(self.r))

    @property
    def r_max(self) -> float:
        return self.r.hi


@dataclass(frozen=True)
class PolarSample:
    r: float
    phi: float
    pdf: float


@dataclass(frozen=True)
class IncidentSample:
    theta_i: float
    r: float
    phi: float
    phi_prime: float
    pdf: float


@dataclass
class BuildConfig:
    """Options of :func:`build_table` beyond the material."""

    grids: TableGrids = field(default_factory=TableGrids.build)
    anchors: AnchorSet = OPTIMIZED_ANCHORS
    convention: SignConvention = DEFAULT_CONVENTION
    workers: int = 1
    diagnostics: str | Path | None = None


# ---------------------------------------------------------------------------
# Table
# ---------------------------------------------------------------------------

@dataclass
class BssrdfTable:
    """Immutable once built; every query method is a pure read."""

    eta: float
    g: float
    grids: TableGrids
    A: np.ndarray
    beta: np.ndarray
    c: np.ndarray
    cum_energy: np.ndarray
    rho_eff: np.ndarray
    stats: BuildStats = field(default_factory=BuildStats)
    convention: SignConvention = DEFAULT_CONVENTION
    anchors: AnchorSet = OPTIMIZED_ANCHORS
    build_samples: int = BUILD_SAMPLES

    def __post_init__(self) -> None:
        for name in ("A", "beta", "c", "cum_energy", "rho_eff"):
            array = np.ascontiguousarray(getattr(self, name), dtype=np.float32)
            array.setflags(write=False)
            setattr(self, name, array)
        # Node energies E_k = A_k r_k, the radial density being sampled.
        self._energy = self.A.astype(np.float64) * self.grids.r.nodes
        # Node rows whose radial spline has a negative lobe; their clamped
        # cum_energy is not linear in the energies, so rows near them re-integrate.
        self._lobed = negative_lobes(self.grids.r, self._energy)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.grids.shape

    # -- parameter lookup ----------------------------------------------------

    def _check_span(self, rho: np.ndarray, theta: np.ndarray) -> None:
        if not np.all(self.grids.rho.contains(rho)):
            raise OutOfDomainError(f"albedo outside [{self.grids.rho.lo}, {self.grids.rho.hi}]")
        if not np.all(self.grids.theta.contains(theta)):
            raise OutOfDomainError(f"incidence outside [{self.grids.theta.lo}, {self.grids.theta.hi}]")

    def channels(
        self, rho: ArrayLike, theta: ArrayLike, r: ArrayLike
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Interpolated (alpha, beta, c), clamped into the valid region."""
        grids = (self.grids.rho, self.grids.theta, self.grids.r)
        coords = (rho, theta, r)
        A = interp_nd(self.A, grids, coords)
        beta = np.maximum(interp_nd(self.beta, grids, coords), 0.0)
        c = np.clip(interp_nd(self.c, grids, coords), 0.0, C_MAX)
        alpha = np.maximum((A - beta) / TWO_PI, 0.0)
        return alpha, beta, c

    def _angular(
        self, rho: np.ndarray, theta: np.ndarray, r: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Channels used for sampling phi; a massless profile falls back to uniform."""
        alpha, beta, c = self.channels(rho, theta, r)
        empty = TWO_PI * alpha + beta <= 0.0
        alpha = np.where(empty, 1.0, alpha)
        return alpha, beta, c

    def radial_rows(self, rho: ArrayLike, theta: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
        """Node energies and their running integral along r for each (rho, theta) query.

        Returns arrays of shape (N, n_r).  The interpolated cum_energy is used
        as is unless the query row or one of its node rows has a negative
        lobe; those rows are clamped and re-integrated.
        """
        rho, theta = np.broadcast_arrays(
            np.atleast_1d(np.asarray(rho, dtype=np.float64)),
            np.atleast_1d(np.asarray(theta, dtype=np.float64)),
        )
        rho, theta = rho.reshape(-1), theta.reshape(-1)
        self._check_span(rho, theta)

        off_a, w_a = cr_weights_batch(self.grids.rho, rho)
        off_b, w_b = cr_weights_batch(self.grids.theta, theta)
        n_rho, n_theta, n_r = self.shape
        energy = np.zeros((rho.shape[0], n_r))
        cumulative = np.zeros((rho.shape[0], n_r))
        lobed = np.zeros(rho.shape[0], dtype=bool)
        cum = self.cum_energy.astype(np.float64)
        for a in range(4):
            ia = np.clip(off_a + a, 0, n_rho - 1)
            for b in range(4):
                ib = np.clip(off_b + b, 0, n_theta - 1)
                w = w_a[:, a] * w_b[:, b]
                energy += w[:, None] * self._energy[ia, ib]
                cumulative += w[:, None] * cum[ia, ib]
                lobed |= (w != 0.0) & self._lobed[ia, ib]

        lobed |= negative_lobes(self.grids.r, energy)
        if np.any(lobed):
            energy[lobed] = np.maximum(energy[lobed], 0.0)
            cumulative[lobed], _ = integrate_1d(self.grids.r, energy[lobed], clamp_negative=True)
        return energy, cumulative

    def effective_albedo(self, rho: ArrayLike, theta: ArrayLike) -> np.ndarray | float:
        """Total diffusely re-emitted energy for the given albedo and incidence."""
        _, cumulative = self.radial_rows(rho, theta)
        total = cumulative[:, -1]
        return float(total[0]) if np.ndim(rho) == 0 and np.ndim(theta) == 0 else total

    # -- evaluation ----------------------------------------------------------

    def evaluate(
        self, rho: ArrayLike, theta: ArrayLike, r: ArrayLike, phi: ArrayLike
    ) -> np.ndarray | float:
        """Model value at (rho, theta, r, phi); zero beyond the last radius."""
        rho, theta, r, phi = np.broadcast_arrays(
            *(np.asarray(v, dtype=np.float64) for v in (rho, theta, r, phi))
        )
        self._check_span(rho, theta)
        if np.any(r < 0):
            raise OutOfDomainError("exit radius must be >= 0")
        inside = r <= self.grids.r_max
        alpha, beta, c = self.channels(rho, theta, np.where(inside, r, 0.0))
        value = np.maximum(alpha + beta * wc_pdf(phi, c), 0.0)
        value = np.where(inside, value, 0.0)
        return value[()] if value.ndim == 0 else value

    def evaluate_perpendicular(self, rho: ArrayLike, r: ArrayLike, phi: ArrayLike = 0.0) -> np.ndarray | float:
        """Model value under the perpendicular-incidence assumption (theta = 0)."""
        return self.evaluate(rho, 0.0, r, phi)

    # -- sampling ------------------------------------------------------------

    def sample_exit_batch(
        self, rho: ArrayLike, theta: ArrayLike, u1: ArrayLike, u2: ArrayLike
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Importance-sample exit points (r, phi) with their joint density."""
        u1 = np.atleast_1d(np.asarray(u1, dtype=np.float64))
        u2 = np.atleast_1d(np.asarray(u2, dtype=np.float64))
        energy, cumulative = self.radial_rows(rho, theta)
        if np.any(~(cumulative[:, -1] > 0.0)):
            raise ZeroMassError("effective albedo is zero for this albedo and incidence")

        r, pdf_r = sample_1d_batch(self.grids.r, energy, cumulative, u1)
        rho_b, theta_b, _ = np.broadcast_arrays(
            np.asarray(rho, dtype=np.float64).reshape(-1),
            np.asarray(theta, dtype=np.float64).reshape(-1),
            r,
        )

        alpha, beta, c = self._angular(rho_b, theta_b, r)
        phi = gwc_sample_batch(u2, alpha, beta, c)
        pdf_phi = (alpha + beta * wc_pdf(phi, c)) / (TWO_PI * alpha + beta)
        return r, phi, pdf_r * pdf_phi

    def sample_exit(self, rho: float, theta: float, u1: float, u2: float) -> PolarSample:
        r, phi, pdf = self.sample_exit_batch(rho, theta, u1, u2)
        return PolarSample(r=float(r[0]), phi=float(phi[0]), pdf=float(pdf[0]))

    def pdf_exit(
        self, rho: ArrayLike, theta: ArrayLike, r: ArrayLike, phi: ArrayLike
    ) -> np.ndarray | float:
        """Joint (r, phi) density realised by :meth:`sample_exit`."""
        rho_a, theta_a, r_a, phi_a = np.broadcast_arrays(
            *(np.atleast_1d(np.asarray(v, dtype=np.float64)) for v in (rho, theta, r, phi))
        )
        shape = r_a.shape
        rho_a, theta_a, r_a, phi_a = (v.reshape(-1) for v in (rho_a, theta_a, r_a, phi_a))
        self._check_span(rho_a, theta_a)

        uniq, inverse = np.unique(np.stack([rho_a, theta_a], axis=1), axis=0, return_inverse=True)
        energy, cumulative = self.radial_rows(uniq[:, 0], uniq[:, 1])
        inverse = inverse.reshape(-1)
        total = cumulative[inverse, -1]
        if np.any(~(total > 0.0)):
            raise ZeroMassError("effective albedo is zero for this albedo and incidence")

        inside = (r_a >= 0.0) & (r_a <= self.grids.r_max)
        r_safe = np.where(inside, r_a, 0.0)
        off, w = cr_weights_batch(self.grids.r, r_safe)
        n_r = self.shape[2]
        radial = np.zeros_like(r_safe)
        for k in range(4):
            radial += w[:, k] * energy[inverse, np.clip(off + k, 0, n_r - 1)]
        pdf_r = np.maximum(radial, 0.0) / total

        alpha, beta, c = self._angular(rho_a, theta_a, r_safe)
        pdf_phi = (alpha + beta * wc_pdf(phi_a, c)) / (TWO_PI * alpha + beta)
        value = np.where(inside, pdf_r * pdf_phi, 0.0).reshape(shape)
        return float(value.reshape(-1)[0]) if np.ndim(r) == 0 and np.ndim(rho) == 0 else value

    def theta_density(self, rho: float) -> tuple[np.ndarray, np.ndarray]:
        """Effective albedo across the incidence nodes at *rho*, with its running integral."""
        rho_a = np.atleast_1d(np.asarray(rho, dtype=np.float64))
        self._check_span(rho_a, np.zeros(1))
        values = interp_nd(
            self.rho_eff.astype(np.float64),
            (self.grids.rho, self.grids.theta),
            (rho_a[:, None], self.grids.theta.nodes[None, :]),
        )[0]
        values = np.maximum(values, 0.0)
        cumulative, _ = integrate_1d(self.grids.theta, values, clamp_negative=True)
        return values, cumulative

    def sample_incident_batch(
        self, rho: float, u0: ArrayLike, u1: ArrayLike, u2: ArrayLike, u3: ArrayLike
    ) -> tuple[np.ndarray, ...]:
        """Sample (theta_i, r, phi, phi') for a fixed albedo; returns arrays and the joint pdf."""
        values, cumulative = self.theta_density(rho)
        if not cumulative[-1] > 0.0:
            raise ZeroMassError(f"effective albedo vanishes for every incidence at rho={rho}")
        theta_i, pdf_theta = sample_1d_batch(self.grids.theta, values, cumulative, u0)
        r, phi, pdf_exit = self.sample_exit_batch(np.full_like(theta_i, rho), theta_i, u1, u2)
        phi_prime = -math.pi + TWO_PI * np.asarray(u3, dtype=np.float64)
        pdf = pdf_theta * pdf_exit / TWO_PI
        return theta_i, r, phi, np.broadcast_to(phi_prime, r.shape), pdf

    def sample_incident(
        self, rho: float, u0: float, u1: float, u2: float, u3: float
    ) -> IncidentSample:
        theta_i, r, phi, phi_prime, pdf = self.sample_incident_batch(rho, u0, u1, u2, u3)
        return IncidentSample(
            theta_i=float(theta_i[0]),
            r=float(r[0]),
            phi=float(phi[0]),
            phi_prime=float(phi_prime[0]),
            pdf=float(pdf[0]),
        )


# ---------------------------------------------------------------------------
# Build
# ---------------------------------------------------------------------------

@dataclass
class _SliceResult:
    index: int
    anchor_values: np.ndarray
    status: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    c: np.ndarray
    negative: int


def _build_slice(
    index: int,
    rho: float,
    eta: float,
    g: float,
    theta_nodes: np.ndarray,
    r_nodes: np.ndarray,
    anchors: AnchorSet,
    convention: SignConvention,
    build_samples: int,
) -> _SliceResult:
    params = MediumParams.from_albedo(eta, g, rho)
    oracle = PhotonBeamDiffusion(params, n_samples=build_samples, convention=convention)
    r_eval = np.where(r_nodes > 0.0, r_nodes, R_ZERO_SUBSTITUTE)
    f = oracle.evaluate(theta_nodes[:, None, None], r_eval[None, :, None], anchors.phis[None, None, :])

    negative = int(np.count_nonzero(f < 0.0))
    f = np.maximum(f, 0.0)

    shape = f.shape[:2]
    alpha = np.empty(shape)
    beta = np.empty(shape)
    c = np.empty(shape)
    status = np.empty(shape, dtype=np.uint8)
    for j in range(shape[0]):
        for k in range(shape[1]):
            fit = gwc_fit(*f[j, k], anchors=anchors)
            alpha[j, k], beta[j, k], c[j, k] = fit.params.alpha, fit.params.beta, fit.params.c
            status[j, k] = fit.status.code
    return _SliceResult(index, f, status, alpha, beta, c, negative)


def _interpolation_discrepancies(A: np.ndarray, beta: np.ndarray, c: np.ndarray, r_grid: Grid1D) -> tuple[int, int]:
    """Count r-midpoints where interpolated channels leave the valid region before clamping."""
    nodes = r_grid.nodes
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    off, w = cr_weights_batch(r_grid, mids)
    idx = np.clip(off[:, None] + np.arange(4)[None, :], 0, nodes.shape[0] - 1)

    def along_r(table: np.ndarray) -> np.ndarray:
        return np.einsum("ijmk,mk->ijm", table.astype(np.float64)[:, :, idx], w)

    A_m, beta_m, c_m = along_r(A), along_r(beta), along_r(c)
    bad = (A_m < beta_m) | (beta_m < 0.0) | (c_m < 0.0) | (c_m >= 1.0)
    return int(np.count_nonzero(bad)), int(bad.size)


def build_table(
    eta: float,
    g: float,
    build_samples: int = BUILD_SAMPLES,
    config: BuildConfig | None = None,
) -> BssrdfTable:
    """Fit the GWC model to the PBD oracle on every (rho, theta, r) node."""
    config = config or BuildConfig()
    if eta <= 1.0:
        raise InvalidParameterError(f"eta must be > 1, got {eta}")
    if not -1.0 <= g <= 1.0:
        raise InvalidParameterError(f"g must lie in [-1, 1], got {g}")
    if build_samples < 1:
        raise InvalidParameterError("build_samples must be >= 1")

    grids = config.grids
    n_rho, n_theta, n_r = grids.shape
    logger.info(
        "Building %dx%dx%d table (eta=%g, g=%g, %d beam samples, %s)",
        n_rho, n_theta, n_r, eta, g, build_samples, config.convention.label(),
    )

    jobs = [
        (i, float(rho), eta, g, grids.theta.nodes, grids.r.nodes,
         config.anchors, config.convention, build_samples)
        for i, rho in enumerate(grids.rho.nodes)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            slices = list(pool.map(_build_slice, *zip(*jobs)))
    else:
        slices = [_build_slice(*job) for job in jobs]

    alpha = np.empty(grids.shape)
    beta = np.empty(grids.shape)
    c = np.empty(grids.shape)
    status = np.empty(grids.shape, dtype=np.uint8)
    stats = BuildStats(total_cells=n_rho * n_theta * n_r)

    recorder = BuildRecorder(str(config.diagnostics)) if config.diagnostics else None
    try:
        for s in slices:
            alpha[s.index], beta[s.index], c[s.index] = s.alpha, s.beta, s.c
            status[s.index] = s.status
            stats.negative_oracle_values += s.negative
            clamped = int(np.count_nonzero(s.status >= FitStatus.CLAMPED.code))
            logger.info(
                "slice %d/%d rho=%.4f: %d clamped, %d degenerate",
                s.index + 1, n_rho, grids.rho.nodes[s.index], clamped,
                int(np.count_nonzero(s.status == FitStatus.DEGENERATE.code)),
            )
            if clamped > 0.01 * n_theta * n_r:
                logger.warning("slice rho=%.4f clamped %d of %d cells",
                               grids.rho.nodes[s.index], clamped, n_theta * n_r)
            if s.negative:
                logger.warning("slice rho=%.4f: %d negative oracle values clamped to 0",
                               grids.rho.nodes[s.index], s.negative)
            if recorder is not None:
                recorder.save_slice(s.index, float(grids.rho.nodes[s.index]),
                                    s.anchor_values, s.status, s.alpha, s.beta, s.c)
    finally:
        if recorder is not None:
            recorder.close()

    stats.degenerate_cells = int(np.count_nonzero(status == FitStatus.DEGENERATE.code))
    stats.clamped_cells = int(np.count_nonzero(status == FitStatus.CLAMPED.code))
    stats.complex_root_cells = int(np.count_nonzero(status == FitStatus.COMPLEX_ROOT.code))

    A32 = (TWO_PI * alpha + beta).astype(np.float32)
    beta32 = beta.astype(np.float32)
    c32 = np.minimum(c, C_MAX).astype(np.float32)

    energy = A32.astype(np.float64) * grids.r.nodes
    cum_energy, clamped_total = integrate_1d(grids.r, energy, clamp_negative=True)
    _, signed_total = integrate_1d(grids.r, energy)
    clamped_mass = np.abs(clamped_total - signed_total) / np.maximum(clamped_total, np.finfo(np.float64).tiny)
    stats.extra["lobed_rows"] = int(np.count_nonzero(negative_lobes(grids.r, energy)))
    stats.extra["max_clamped_mass"] = float(np.max(clamped_mass, initial=0.0))
    if stats.extra["max_clamped_mass"] > CLAMPED_MASS_WARNING:
        logger.warning("radial spline clamping removed up to %.3g of a row's energy",
                       stats.extra["max_clamped_mass"])
    cum32 = cum_energy.astype(np.float32)
    rho_eff = cum32[..., -1].copy()

    stats.rho_eff_above_one = int(np.count_nonzero(rho_eff > 1.0))
    stats.rho_eff_unphysical = int(np.count_nonzero(rho_eff > 1.0 + RHO_EFF_TOLERANCE))
    stats.rho_eff_monotonicity_violations = int(np.count_nonzero(np.diff(rho_eff, axis=0) < 0.0))
    stats.interpolation_discrepancies, stats.discrepancy_checks = _interpolation_discrepancies(
        A32, beta32, c32, grids.r
    )
    if stats.rho_eff_unphysical:
        logger.warning("%d effective albedo cells exceed 1 + %g", stats.rho_eff_unphysical, RHO_EFF_TOLERANCE)
    if stats.rho_eff_monotonicity_violations:
        logger.warning("effective albedo decreases with albedo at %d cells",
                       stats.rho_eff_monotonicity_violations)
    logger.info(
        "Build done: clamp rate %.4f%%, %d degenerate, %d complex-root, discrepancy rate %.4f%%",
        100.0 * stats.clamp_rate, stats.degenerate_cells, stats.complex_root_cells,
        100.0 * stats.discrepancy_rate,
    )

    return BssrdfTable(
        eta=eta,
        g=g,
        grids=grids,
        A=A32,
        beta=beta32,
        c=c32,
        cum_energy=cum32,
        rho_eff=rho_eff,
        stats=stats,
        convention=config.convention,
        anchors=config.anchors,
        build_samples=build_samples,
    )


def radial_energy(table: BssrdfTable, rho: float, theta: float, r: ArrayLike) -> np.ndarray:
    """Interpolated radial energy density E(r) used by the sampler."""
    energy, _ = table.radial_rows(rho, theta)
    return np.maximum(eval_1d(table.grids.r, energy[0], r), 0.0)
