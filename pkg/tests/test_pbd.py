"""Tests for the Photon Beam Diffusion reference."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gwc_bssrdf.core.errors import DegenerateDistanceError, InvalidParameterError
from gwc_bssrdf.core.medium import (
    DEFAULT_CONVENTION,
    VERBATIM,
    MediumParams,
    SignConvention,
    derive_constants,
)
from gwc_bssrdf.model.wrapped_cauchy import OPTIMIZED_ANCHORS
from gwc_bssrdf.simulation.pbd import (
    BeamGeometry,
    PhotonBeamDiffusion,
    eval_sp_ms,
    geometric_terms,
    pbd_integrand,
)

from .conftest import ETA, G


@pytest.fixture
def consts(skin_medium):
    return derive_constants(skin_medium)


class TestGeometricTerms:

    def test_normal_incidence_keeps_lateral_distance(self, consts):
        gt = geometric_terms(consts, 0.0, BeamGeometry(0.0, 0.7, 1.2), 0.4)
        assert gt.lambda_sq == pytest.approx(0.49)
        assert gt.z_r == pytest.approx(0.4)
        assert gt.z_v == pytest.approx(2.0 * consts.z_b - 0.4)

    def test_beam_below_entry_point(self, consts):
        gt = geometric_terms(consts, math.pi / 6, BeamGeometry(0.5, 0.0, 0.0), 1.0)
        assert gt.lambda_sq == pytest.approx(0.25)
        assert gt.d_r == pytest.approx(1.0)

    def test_surface_depth(self, consts):
        gt = geometric_terms(consts, 0.3, BeamGeometry(0.4, 2.0, 0.5), 0.0)
        assert gt.d_r == pytest.approx(2.0)
        assert gt.Q == pytest.approx(consts.rho_prime * consts.sigma_t_prime)

    def test_kappa_in_unit_interval(self, consts):
        for t in (0.0, 0.01, 1.0, 10.0):
            gt = geometric_terms(consts, 0.2, BeamGeometry(0.3, 0.5, 0.0), t)
            assert 0.0 <= gt.kappa <= 1.0

    def test_rejects_negative_depth(self, consts):
        with pytest.raises(InvalidParameterError):
            geometric_terms(consts, 0.0, BeamGeometry(0.0, 1.0, 0.0), -0.1)


class TestIntegrand:

    def test_vanishes_for_symmetric_dipole(self, consts):
        # z_b = 0 puts the virtual source at the mirror image of the real one.
        mirrored = replace(consts, z_b=0.0, C_E=0.0)
        gt = geometric_terms(mirrored, 0.0, BeamGeometry(0.0, 1.0, 0.0), 0.5)
        assert gt.d_r == pytest.approx(gt.d_v)
        assert pbd_integrand(mirrored, gt) == pytest.approx(0.0, abs=1e-15)

    def test_positive_off_beam(self, consts):
        gt = geometric_terms(consts, 0.4, BeamGeometry(0.6, 1.0, 2.0), 0.8)
        assert pbd_integrand(consts, gt) > 0.0

    @pytest.mark.parametrize("convention,expected", [
        (VERBATIM, 0.00937932251829),
        (DEFAULT_CONVENTION, 0.0114657548016),
    ])
    def test_frozen_value(self, skin_medium, convention, expected):
        consts = derive_constants(skin_medium, convention)
        gt = geometric_terms(consts, 0.4, BeamGeometry(0.6, 1.0, 2.0), 0.8)
        assert pbd_integrand(consts, gt) == pytest.approx(expected, rel=1e-9)

    def test_exit_on_beam_is_degenerate(self, consts):
        gt = geometric_terms(consts, 0.0, BeamGeometry(0.0, 0.0, 0.0), 0.0)
        with pytest.raises(DegenerateDistanceError):
            pbd_integrand(consts, gt)


class TestBeamGeometry:

    @pytest.mark.parametrize("theta,r,phi", [
        (0.0, -1.0, 0.0),
        (-0.1, 1.0, 0.0),
        (2.0, 1.0, 0.0),
        (0.0, math.inf, 0.0),
        (0.0, 1.0, math.nan),
    ])
    def test_rejects_invalid(self, theta, r, phi):
        with pytest.raises(InvalidParameterError):
            BeamGeometry(theta, r, phi)


class TestPhotonBeamDiffusion:

    def test_broadcast_shape(self, skin_medium):
        oracle = PhotonBeamDiffusion(skin_medium, n_samples=64)
        values = oracle.evaluate(0.3, np.array([[0.5], [1.0]]), np.array([0.0, 1.0, 2.0]))
        assert values.shape == (2, 3)

    def test_scalar_helper_matches_vectorised(self, skin_medium):
        geom = BeamGeometry(0.5, 1.5, 0.3)
        oracle = PhotonBeamDiffusion(skin_medium, n_samples=256)
        expected = float(oracle.evaluate(geom.theta, geom.r, geom.phi))
        assert eval_sp_ms(skin_medium, geom, n_samples=256) == expected

    def test_rejects_zero_samples(self, skin_medium):
        with pytest.raises(InvalidParameterError):
            PhotonBeamDiffusion(skin_medium, n_samples=0)

    def test_deterministic(self, skin_medium):
        a = PhotonBeamDiffusion(skin_medium, n_samples=128).evaluate(0.7, 0.9, 0.4)
        b = PhotonBeamDiffusion(skin_medium, n_samples=128).evaluate(0.7, 0.9, 0.4)
        assert a == b

    def test_phi_independent_at_normal_incidence(self, skin_medium):
        oracle = PhotonBeamDiffusion(skin_medium, n_samples=500)
        phi = np.linspace(0.0, 2.0 * math.pi, 9)
        values = oracle.evaluate(0.0, 0.8, phi)
        assert_allclose(values, values[0], rtol=1e-13)

    def test_even_in_phi(self, skin_medium, grazing):
        oracle = PhotonBeamDiffusion(skin_medium, n_samples=500)
        phi = np.linspace(0.1, math.pi, 7)
        for theta in (math.radians(30.0), math.radians(60.0), grazing):
            assert_allclose(oracle.evaluate(theta, 1.2, phi), oracle.evaluate(theta, 1.2, -phi),
                            rtol=1e-12)

    @pytest.mark.parametrize("rho", [0.1, 0.5, 0.9, 0.99])
    def test_non_negative(self, rho, grazing):
        oracle = PhotonBeamDiffusion(MediumParams.from_albedo(ETA, G, rho), n_samples=400)
        theta = np.array([0.0, math.radians(45.0), grazing])[:, None, None]
        r = np.geomspace(0.01, 50.0, 25)[None, :, None]
        phi = np.linspace(0.0, math.pi, 7)[None, None, :]
        assert np.all(oracle.evaluate(theta, r, phi) >= 0.0)

    @pytest.mark.parametrize("theta_deg,phi", [(0.0, 0.0), (60.0, math.pi), (60.0, math.pi / 2)])
    def test_decays_beyond_one_mean_free_path(self, theta_deg, phi):
        oracle = PhotonBeamDiffusion(MediumParams.from_albedo(ETA, G, 0.9), n_samples=2000)
        r = np.linspace(1.0, 20.0, 40)
        values = oracle.evaluate(math.radians(theta_deg), r, phi)
        assert np.all(np.diff(values) <= 0.0)

    def test_forward_lobe_at_grazing(self, skin_medium, grazing):
        oracle = PhotonBeamDiffusion(skin_medium, n_samples=1000)
        forward, backward = oracle.evaluate(grazing, 1.0, np.array([0.0, math.pi]))
        assert forward > backward

    def test_sign_flags_change_the_estimate(self, skin_medium):
        verbatim = PhotonBeamDiffusion(
            skin_medium, n_samples=200, convention=VERBATIM
        ).evaluate(0.5, 1.0, 0.0)
        flipped = PhotonBeamDiffusion(
            skin_medium, n_samples=200, convention=SignConvention(flip_virtual_flux=True)
        ).evaluate(0.5, 1.0, 0.0)
        assert flipped != pytest.approx(verbatim, rel=1e-6)

    @pytest.mark.parametrize("rho", [0.3, 0.9, 0.99])
    def test_converges_with_depth_samples(self, rho):
        params = MediumParams.from_albedo(ETA, G, rho)
        theta = np.radians([0.0, 60.0, 89.0])[:, None, None]
        r = np.array([0.2, 0.5, 1.0, 2.0, 4.0])[None, :, None]
        phi = np.array([0.0, math.pi / 2, math.pi])[None, None, :]
        coarse = PhotonBeamDiffusion(params, n_samples=200).evaluate(theta, r, phi)
        fine = PhotonBeamDiffusion(params, n_samples=10_000).evaluate(theta, r, phi)
        assert_allclose(coarse, fine, rtol=1e-3)


@pytest.mark.slow
class TestConvergenceSweep:

    def test_hundred_point_grid(self):
        rng = np.random.default_rng(7)
        rho = rng.uniform(0.05, 0.99, 100)
        theta = rng.uniform(0.0, math.radians(89.0), 100)
        r = np.exp(rng.uniform(math.log(0.1), math.log(10.0), 100))
        phi = rng.uniform(0.0, math.pi, 100)
        for args in zip(rho, theta, r, phi):
            params = MediumParams.from_albedo(ETA, G, float(args[0]))
            geom = BeamGeometry(*(float(a) for a in args[1:]))
            fine = eval_sp_ms(params, geom, n_samples=10_000)
            coarse = eval_sp_ms(params, geom, n_samples=200)
            assert abs(coarse - fine) <= 1e-3 * fine


# Depth integrals at rho = 0.5, theta = 89 deg, r = 1 and the optimised anchor
# angles, from a 4e6-interval Simpson rule over t in [0, 80].
ANCHOR_VALUES = (0.009058339109, 0.003994254775, 0.001895353029)


class TestAnchorValues:

    @pytest.fixture
    def half_albedo(self):
        return MediumParams.from_albedo(ETA, G, 0.5)

    def test_default_oracle(self, half_albedo):
        oracle = PhotonBeamDiffusion(half_albedo)
        values = oracle.evaluate(math.radians(89.0), 1.0, OPTIMIZED_ANCHORS.phis)
        assert_allclose(values, ANCHOR_VALUES, rtol=1e-3)

    @pytest.mark.slow
    def test_million_samples(self, half_albedo):
        oracle = PhotonBeamDiffusion(half_albedo, n_samples=1_000_000)
        values = oracle.evaluate(math.radians(89.0), 1.0, OPTIMIZED_ANCHORS.phis)
        assert_allclose(values, ANCHOR_VALUES, rtol=1e-5)
