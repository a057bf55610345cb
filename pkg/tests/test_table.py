"""Tests for the tabulated model: build, evaluation and sampling."""

from __future__ import annotations

import math

import h5py
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy.integrate import cumulative_trapezoid
from scipy.stats import chisquare, kstest

from gwc_bssrdf.core.errors import InvalidParameterError, OutOfDomainError, ZeroMassError
from gwc_bssrdf.core.medium import DEFAULT_CONVENTION
from gwc_bssrdf.evaluation.framework import REFERENCE_CONFIGS
from gwc_bssrdf.model.catmullrom import eval_1d, negative_lobes
from gwc_bssrdf.model.serialization import serialize
from gwc_bssrdf.model.table import BuildConfig, TableGrids, build_table, radial_energy
from gwc_bssrdf.model.wrapped_cauchy import FitStatus, GwcParams, gwc_cdf

from .conftest import COARSE_SAMPLES, ETA, G

CONFIGS = [(0.5, 0.0), (0.9, math.radians(60.0)), (0.99, math.radians(89.0))]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _segment_quadrature(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights on every interval of *edges*."""
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _GL_X
    w = 0.5 * (hi - lo) * _GL_W
    return x, w


def _pdf_r(table, rho, theta, r):
    return radial_energy(table, rho, theta, r) / table.effective_albedo(rho, theta)


def _assert_pdf_exit_normalised(table, rho, theta):
    x, w = _segment_quadrature(table.grids.r.nodes)
    r = x.reshape(-1)
    n_phi = 4096
    phi = -math.pi + 2.0 * math.pi * np.arange(n_phi) / n_phi
    density = table.pdf_exit(rho, theta, r[:, None], phi[None, :])
    marginal = density.sum(axis=1) * (2.0 * math.pi / n_phi)
    pdf_r = _pdf_r(table, rho, theta, r)
    # the periodic rule error on a lobe is about 2 c**n_phi
    _, _, c = table.channels(rho, theta, r)
    smooth = c**n_phi <= 1e-8
    assert_allclose(marginal[smooth], pdf_r[smooth], rtol=1e-6, atol=1e-12)
    assert (pdf_r * w.reshape(-1)).sum() == pytest.approx(1.0, abs=1e-3)


def _assert_joint_histogram(table, rho, theta, n=400_000):
    rng = np.random.default_rng(61)
    r, phi, _ = table.sample_exit_batch(rho, theta, rng.uniform(size=n), rng.uniform(size=n))

    r_edges, _, _ = table.sample_exit_batch(rho, theta, np.linspace(0.0, 1.0, 33), 0.5)
    r_edges[0], r_edges[-1] = 0.0, table.grids.r_max
    phi_edges = np.linspace(-math.pi, math.pi, 33)
    observed, _, _ = np.histogram2d(r, phi, bins=(r_edges, phi_edges))

    x, w = _segment_quadrature(r_edges)
    pdf_r = _pdf_r(table, rho, theta, x.reshape(-1)).reshape(x.shape)
    alpha, beta, c = table.channels(rho, theta, x.reshape(-1))
    expected = np.zeros_like(observed)
    for q in range(x.size):
        profile = GwcParams(alpha[q], beta[q], c[q])
        if profile.total_mass > 0.0:
            mass = np.diff(gwc_cdf(phi_edges, profile))
        else:
            # the sampler draws phi uniformly where the tail profile underflows
            mass = np.full(phi_edges.size - 1, 1.0 / (phi_edges.size - 1))
        expected[q // x.shape[1]] += w.reshape(-1)[q] * pdf_r.reshape(-1)[q] * mass
    expected *= n / expected.sum()

    keep = expected >= 5.0
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0.0:
        obs, exp = obs[:-1], exp[:-1]
    assert chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > 0.01


class TestTableGrids:

    def test_full_grid_formulas(self):
        grids = TableGrids.build()
        assert grids.shape == (100, 10, 64)
        assert grids.rho.nodes[0] == 0.0
        assert grids.rho.nodes[-1] == pytest.approx(1.0, abs=1e-15)
        i = 37
        assert grids.rho.nodes[i] == pytest.approx((1 - math.exp(-8 * i / 99)) / (1 - math.exp(-8)))
        assert_allclose(grids.theta.nodes, np.arange(10) * math.pi / 18)
        assert grids.r.nodes[0] == 0.0
        assert grids.r.nodes[1] == pytest.approx(0.003)
        assert grids.r_max == pytest.approx(0.0025 * 1.2**63)
        assert 240.0 < grids.r_max < 250.0

    def test_from_arrays_validates(self):
        with pytest.raises(InvalidParameterError):
            TableGrids.from_arrays([0.0, 1.0], [0.0, 0.5], [1.0, 0.5])


class TestBuild:

    def test_shapes_and_dtypes(self, coarse_table, coarse_grids):
        for name in ("A", "beta", "c", "cum_energy"):
            array = getattr(coarse_table, name)
            assert array.shape == coarse_grids.shape
            assert array.dtype == np.float32
            assert not array.flags.writeable
        assert coarse_table.rho_eff.shape == coarse_grids.shape[:2]

    def test_cell_invariants(self, coarse_table):
        t = coarse_table
        assert np.all(t.A >= 0.0)
        assert np.all(t.beta >= 0.0)
        assert np.all((t.c >= 0.0) & (t.c < 1.0))
        assert np.all(t.beta <= t.A * (1.0 + 1e-6))
        assert np.all(np.diff(t.cum_energy, axis=-1) >= 0.0)
        assert_array_equal(t.rho_eff, t.cum_energy[..., -1])

    def test_effective_albedo_physical(self, coarse_table):
        assert np.all(coarse_table.rho_eff <= 1.05)
        above = int(np.count_nonzero(coarse_table.rho_eff > 1.0))
        assert coarse_table.stats.rho_eff_above_one == above

    def test_monotonicity_violations_reported(self, coarse_table):
        violations = int(np.count_nonzero(np.diff(coarse_table.rho_eff, axis=0) < 0.0))
        assert coarse_table.stats.rho_eff_monotonicity_violations == violations

    def test_zero_albedo_reflects_nothing(self, coarse_table):
        assert_array_equal(coarse_table.A[0], 0.0)
        assert_array_equal(coarse_table.rho_eff[0], 0.0)
        assert coarse_table.evaluate(0.0, 0.4, 1.0, 0.3) == 0.0

    def test_normal_incidence_is_azimuthally_flat(self, coarse_table):
        assert_array_equal(coarse_table.c[:, 0, :], 0.0)
        phi = np.linspace(-math.pi, math.pi, 33)
        values = coarse_table.evaluate(0.7, 0.0, 1.3, phi)
        assert_allclose(values, values[0], rtol=1e-12)

    def test_stats(self, coarse_table, coarse_grids):
        stats = coarse_table.stats
        n_rho, n_theta, n_r = coarse_grids.shape
        assert stats.total_cells == n_rho * n_theta * n_r
        assert stats.discrepancy_checks == n_rho * n_theta * (n_r - 1)
        assert 0.0 <= stats.clamp_rate <= 1.0
        assert stats.degenerate_cells >= n_rho * n_r
        energy = coarse_table.A.astype(np.float64) * coarse_grids.r.nodes
        assert stats.extra["lobed_rows"] == int(np.count_nonzero(negative_lobes(coarse_grids.r, energy)))
        assert 0.0 <= stats.extra["max_clamped_mass"] < 1.0
        assert coarse_table.convention == DEFAULT_CONVENTION
        assert coarse_table.build_samples == COARSE_SAMPLES

    def test_anchor_reproduction(self, coarse_table, diagnostics_path):
        anchors = coarse_table.anchors.phis
        grids = coarse_table.grids
        checked = 0
        with h5py.File(diagnostics_path, "r") as fh:
            assert fh["summary"].shape == (len(grids.rho), 3)
            for i, rho in enumerate(grids.rho.nodes):
                group = fh[f"slice_{i:03d}"]
                assert group.attrs["rho"] == pytest.approx(rho)
                f = group["anchor_values"][()]
                status = group["status"][()]
                for j, theta in enumerate(grids.theta.nodes):
                    for k, r in enumerate(grids.r.nodes):
                        if status[j, k] != FitStatus.OK.code or f[j, k].min() < 1e-25:
                            continue
                        model = coarse_table.evaluate(rho, theta, r, anchors)
                        assert_allclose(model, f[j, k], rtol=1e-5)
                        checked += 1
        assert checked > 0

    def test_energy_identity(self, coarse_table):
        r_grid = coarse_table.grids.r
        x, w = _segment_quadrature(r_grid.nodes)
        max_clamped = coarse_table.stats.extra["max_clamped_mass"]
        for i in range(1, coarse_table.shape[0], 3):
            for j in range(coarse_table.shape[1]):
                energy = coarse_table.A[i, j].astype(np.float64) * r_grid.nodes
                pieces = (eval_1d(r_grid, energy, x.reshape(-1)).reshape(x.shape) * w).sum(axis=1)
                direct = np.concatenate([[0.0], np.cumsum(pieces)])
                stored = coarse_table.cum_energy[i, j].astype(np.float64)
                if negative_lobes(r_grid, energy):
                    # only the negative lobes are dropped from the stored energy
                    assert stored[-1] >= direct[-1] * (1.0 - 1e-6)
                    assert stored[-1] - direct[-1] <= (max_clamped + 1e-6) * stored[-1]
                else:
                    assert_allclose(stored, direct, rtol=1e-6, atol=1e-6 * direct[-1])

    def test_deterministic(self, coarse_table, coarse_grids):
        again = build_table(ETA, G, build_samples=COARSE_SAMPLES, config=BuildConfig(grids=coarse_grids))
        assert serialize(again) == serialize(coarse_table)

    def test_default_convention(self):
        assert BuildConfig().convention == DEFAULT_CONVENTION

    @pytest.mark.parametrize("eta,g,samples", [(1.0, 0.0, 10), (1.33, 1.5, 10), (1.33, 0.0, 0)])
    def test_rejects_invalid_material(self, eta, g, samples):
        with pytest.raises(InvalidParameterError):
            build_table(eta, g, build_samples=samples)


class TestEvaluate:

    def test_even_in_phi(self, coarse_table):
        phi = np.linspace(0.0, math.pi, 17)
        for rho, theta in CONFIGS:
            assert_allclose(coarse_table.evaluate(rho, theta, 0.8, phi),
                            coarse_table.evaluate(rho, theta, 0.8, -phi), rtol=1e-14)

    def test_non_negative(self, coarse_table):
        rng = np.random.default_rng(21)
        rho = rng.uniform(0.0, 1.0, 5000)
        theta = rng.uniform(0.0, math.pi / 2, 5000)
        r = rng.uniform(0.0, 20.0, 5000)
        phi = rng.uniform(-math.pi, math.pi, 5000)
        assert np.all(coarse_table.evaluate(rho, theta, r, phi) >= 0.0)

    def test_zero_beyond_last_radius(self, coarse_table):
        r_max = coarse_table.grids.r_max
        assert coarse_table.evaluate(0.9, 0.5, r_max * 1.01, 0.0) == 0.0
        assert coarse_table.evaluate(0.9, 0.5, r_max, 0.0) >= 0.0

    def test_regular_at_origin(self, coarse_table):
        value = coarse_table.evaluate(0.9, 0.5, 0.0, 0.0)
        assert math.isfinite(value) and value > 0.0

    @pytest.mark.parametrize("rho,theta,r", [(1.1, 0.0, 1.0), (-0.1, 0.0, 1.0), (0.5, 1.6, 1.0), (0.5, 0.0, -1.0)])
    def test_out_of_domain(self, coarse_table, rho, theta, r):
        with pytest.raises(OutOfDomainError):
            coarse_table.evaluate(rho, theta, r, 0.0)

    def test_perpendicular_model(self, coarse_table):
        r = np.array([0.1, 1.0, 5.0])
        assert_array_equal(coarse_table.evaluate_perpendicular(0.8, r, 0.4),
                           coarse_table.evaluate(0.8, 0.0, r, 0.4))

    def test_effective_albedo_at_nodes(self, coarse_table):
        grids = coarse_table.grids
        value = coarse_table.effective_albedo(float(grids.rho.nodes[6]), float(grids.theta.nodes[2]))
        assert value == pytest.approx(float(coarse_table.rho_eff[6, 2]), rel=1e-6)

    def test_channels_valid(self, coarse_table):
        alpha, beta, c = coarse_table.channels(0.6, 0.9, np.geomspace(1e-3, 100.0, 50))
        assert np.all(alpha >= 0.0) and np.all(beta >= 0.0)
        assert np.all((c >= 0.0) & (c < 1.0))


class TestSampleExit:

    def test_within_support(self, coarse_table):
        rng = np.random.default_rng(31)
        r, phi, pdf = coarse_table.sample_exit_batch(0.9, 1.0, rng.uniform(size=5000), rng.uniform(size=5000))
        assert np.all((r >= 0.0) & (r <= coarse_table.grids.r_max))
        assert np.all(np.abs(phi) <= math.pi)
        assert np.all(pdf > 0.0)

    def test_deterministic(self, coarse_table):
        a = coarse_table.sample_exit(0.9, 1.0, 0.3, 0.8)
        b = coarse_table.sample_exit(0.9, 1.0, 0.3, 0.8)
        assert a == b

    def test_median_direction_is_forward(self, coarse_table):
        assert coarse_table.sample_exit(0.5, 0.0, 0.4, 0.5).phi == pytest.approx(0.0, abs=1e-12)
        assert coarse_table.sample_exit(0.9, 1.2, 0.4, 0.5).phi == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("rho,theta", CONFIGS)
    def test_pdf_matches_pdf_exit(self, coarse_table, rho, theta):
        rng = np.random.default_rng(41)
        r, phi, pdf = coarse_table.sample_exit_batch(rho, theta, rng.uniform(size=500), rng.uniform(size=500))
        assert_allclose(coarse_table.pdf_exit(rho, theta, r, phi), pdf, rtol=1e-9)

    @pytest.mark.parametrize("rho,theta", CONFIGS)
    def test_pdf_exit_normalised(self, coarse_table, rho, theta):
        _assert_pdf_exit_normalised(coarse_table, rho, theta)

    def test_pdf_exit_outside_support(self, coarse_table):
        assert coarse_table.pdf_exit(0.9, 0.5, coarse_table.grids.r_max + 1.0, 0.0) == 0.0

    def test_uniform_azimuth_at_normal_incidence(self, coarse_table):
        rng = np.random.default_rng(51)
        n = 1_000_000
        _, phi, _ = coarse_table.sample_exit_batch(0.5, 0.0, rng.uniform(size=n), rng.uniform(size=n))
        observed, _ = np.histogram(phi, bins=np.linspace(-math.pi, math.pi, 65))
        assert chisquare(observed).pvalue > 0.01

    @pytest.mark.parametrize("rho,theta", CONFIGS)
    def test_joint_histogram_matches_pdf(self, coarse_table, rho, theta):
        _assert_joint_histogram(coarse_table, rho, theta)

    def test_zero_albedo_has_no_mass(self, coarse_table):
        with pytest.raises(ZeroMassError):
            coarse_table.sample_exit(0.0, 0.3, 0.5, 0.5)

    def test_radial_energy_vanishes_at_origin(self, coarse_table):
        assert radial_energy(coarse_table, 0.9, 0.5, 0.0)[()] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.slow
class TestFullGridSampling:

    @pytest.mark.parametrize("rho,theta_deg", REFERENCE_CONFIGS)
    def test_pdf_exit_normalised(self, full_table, rho, theta_deg):
        _assert_pdf_exit_normalised(full_table, rho, math.radians(theta_deg))

    @pytest.mark.parametrize("rho,theta_deg", REFERENCE_CONFIGS)
    def test_joint_histogram_matches_pdf(self, full_table, rho, theta_deg):
        _assert_joint_histogram(full_table, rho, math.radians(theta_deg))


class TestSampleIncident:

    def test_zero_albedo_rejected(self, coarse_table):
        with pytest.raises(ZeroMassError):
            coarse_table.sample_incident(0.0, 0.1, 0.2, 0.3, 0.4)

    def test_incidence_follows_effective_albedo(self, coarse_table):
        n = 250_000
        rng = np.random.default_rng(71)
        u = rng.uniform(size=(4, n))
        theta_i, r, phi, phi_prime, pdf = coarse_table.sample_incident_batch(0.9, *u)

        values, _ = coarse_table.theta_density(0.9)
        fine = np.linspace(0.0, math.pi / 2, 20_001)
        density = np.maximum(eval_1d(coarse_table.grids.theta, values, fine), 0.0)
        cdf = cumulative_trapezoid(density, fine, initial=0.0)
        cdf /= cdf[-1]
        assert kstest(theta_i, lambda t: np.interp(t, fine, cdf)).statistic <= 0.0045

        observed, _ = np.histogram(phi_prime, bins=np.linspace(-math.pi, math.pi, 65))
        assert chisquare(observed).pvalue > 0.01
        assert np.all(pdf > 0.0)

    def test_pdf_is_product_of_stages(self, coarse_table):
        theta_i, r, phi, _, pdf = coarse_table.sample_incident_batch(0.9, [0.2, 0.7], [0.3, 0.6], [0.5, 0.9], [0.1, 0.4])
        values, cumulative = coarse_table.theta_density(0.9)
        pdf_theta = np.maximum(eval_1d(coarse_table.grids.theta, values, theta_i), 0.0) / cumulative[-1]
        pdf_exit = coarse_table.pdf_exit(0.9, theta_i, r, phi)
        assert_allclose(pdf, pdf_theta * pdf_exit / (2.0 * math.pi), rtol=1e-9)
