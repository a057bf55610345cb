"""Tests for material parameters, Fresnel terms and diffusion constants."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from gwc_bssrdf.core.errors import InvalidParameterError
from gwc_bssrdf.core.medium import (
    DEFAULT_CONVENTION,
    VERBATIM,
    MediumParams,
    SignConvention,
    derive_constants,
    fresnel_moment,
    fresnel_reflectance,
    refract_cos,
)


class TestFresnelReflectance:

    def test_normal_incidence(self):
        expected = ((1.33 - 1.0) / (1.33 + 1.0)) ** 2
        assert fresnel_reflectance(1.33, 1.0) == pytest.approx(expected, rel=1e-12)
        assert fresnel_reflectance(1.33, 1.0) == pytest.approx(0.02006, abs=1e-5)

    def test_matched_indices(self):
        assert fresnel_reflectance(1.0, 0.5) == pytest.approx(0.0, abs=1e-15)

    def test_grazing_reflects_everything(self):
        assert fresnel_reflectance(1.5, 0.0) == pytest.approx(1.0)

    def test_vectorised(self):
        values = fresnel_reflectance(1.33, np.array([0.0, 0.5, 1.0]))
        assert values.shape == (3,)

    def test_monotone_in_cosine(self):
        mu = np.linspace(0.0, 1.0, 1000)
        values = fresnel_reflectance(1.33, mu)
        assert np.all(np.diff(values) <= 1e-15)


class TestFresnelMoments:

    @pytest.mark.parametrize("k", [1, 2])
    def test_matches_adaptive_quadrature(self, k):
        reference, _ = quad(lambda mu: float(fresnel_reflectance(1.33, mu)) * mu**k, 0.0, 1.0,
                            epsabs=1e-14, epsrel=1e-12)
        assert fresnel_moment(1.33, k) == pytest.approx(reference, rel=1e-8)

    def test_vanishes_for_matched_indices(self):
        assert fresnel_moment(1.0 + 1e-6, 1) < 1e-4

    @pytest.mark.parametrize("k,expected", [(1, 0.0329654246497), (2, 0.013137767357)])
    def test_frozen_values_for_water(self, k, expected):
        assert fresnel_moment(1.33, k) == pytest.approx(expected, rel=1e-9)

    def test_bounded_by_moments_of_one(self):
        assert 0.0 < fresnel_moment(1.33, 1) < 0.5
        assert 0.0 < fresnel_moment(1.33, 2) < 1.0 / 3.0

    def test_rejects_bad_order(self):
        with pytest.raises(InvalidParameterError):
            fresnel_moment(1.33, 3)


class TestRefractCos:

    def test_normal_incidence(self):
        assert refract_cos(1.33, 0.0) == (0.0, 1.0)

    def test_grazing(self):
        sin_p, cos_p = refract_cos(1.33, math.pi / 2)
        assert sin_p == pytest.approx(1 / 1.33)
        assert cos_p == pytest.approx(0.6593, abs=1e-4)

    def test_thirty_degrees(self):
        sin_p, cos_p = refract_cos(2.0, math.pi / 6)
        assert sin_p == pytest.approx(0.25)
        assert cos_p == pytest.approx(math.sqrt(0.9375))

    def test_unit_norm(self):
        for theta in np.linspace(0.0, math.pi / 2, 50):
            sin_p, cos_p = refract_cos(1.33, theta)
            assert abs(sin_p**2 + cos_p**2 - 1.0) <= 1e-12


class TestMediumParams:

    def test_albedo(self):
        params = MediumParams(eta=1.33, g=0.0, sigma_s=0.95, sigma_a=0.05)
        assert params.albedo == pytest.approx(0.95)
        assert params.sigma_t == pytest.approx(1.0)

    def test_from_albedo(self):
        params = MediumParams.from_albedo(1.33, 0.2, 0.8, sigma_t=2.0)
        assert params.sigma_s == pytest.approx(1.6)
        assert params.sigma_a == pytest.approx(0.4)

    @pytest.mark.parametrize("kwargs", [
        dict(eta=1.0, g=0.0, sigma_s=1.0, sigma_a=0.0),
        dict(eta=1.33, g=1.5, sigma_s=1.0, sigma_a=0.0),
        dict(eta=1.33, g=0.0, sigma_s=-1.0, sigma_a=0.5),
        dict(eta=1.33, g=0.0, sigma_s=0.0, sigma_a=0.0),
        dict(eta=1.33, g=0.0, sigma_s=math.nan, sigma_a=0.1),
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidParameterError):
            MediumParams(**kwargs)

    def test_rejects_albedo_outside_unit_interval(self):
        with pytest.raises(InvalidParameterError):
            MediumParams.from_albedo(1.33, 0.0, 1.2)


class TestDeriveConstants:

    def test_hand_computed(self):
        consts = derive_constants(MediumParams(eta=1.33, g=0.0, sigma_s=0.95, sigma_a=0.05))
        assert consts.sigma_s_prime == pytest.approx(0.95)
        assert consts.sigma_t_prime == pytest.approx(1.0)
        assert consts.rho_prime == pytest.approx(0.95)
        assert consts.D == pytest.approx(0.35)
        assert consts.sigma_tr == pytest.approx(0.37796, abs=1e-5)

    def test_no_scattering_anisotropy_keeps_sigma_s(self):
        consts = derive_constants(MediumParams(eta=1.5, g=0.0, sigma_s=3.0, sigma_a=0.7))
        assert consts.sigma_s_prime == 3.0

    def test_zero_absorption(self):
        consts = derive_constants(MediumParams(eta=1.33, g=0.5, sigma_s=2.0, sigma_a=0.0))
        assert consts.sigma_s_prime == pytest.approx(1.0)
        assert consts.sigma_t_prime == pytest.approx(1.0)
        assert consts.sigma_tr == 0.0

    def test_boundary_constants_follow_moments(self):
        consts = derive_constants(MediumParams.from_albedo(1.33, 0.0, 0.9))
        f1, f2 = fresnel_moment(1.33, 1), fresnel_moment(1.33, 2)
        assert consts.z_b == pytest.approx(-2.0 * consts.D * (1 + 3 * f2) / (1 - 2 * f1))
        assert consts.C_phi == pytest.approx((1 - 2 * f1) / 4)
        assert consts.C_E == pytest.approx((1 - 3 * f2) / 2)
        assert consts.z_b < 0

    @pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
    def test_scale_invariance(self, s):
        base = derive_constants(MediumParams(eta=1.33, g=0.3, sigma_s=0.8, sigma_a=0.2))
        scaled = derive_constants(MediumParams(eta=1.33, g=0.3, sigma_s=0.8 * s, sigma_a=0.2 * s))
        assert scaled.sigma_tr == pytest.approx(base.sigma_tr * s, rel=1e-12)
        assert scaled.D == pytest.approx(base.D / s, rel=1e-12)

    def test_forward_scattering_limit_rejected(self):
        with pytest.raises(InvalidParameterError):
            derive_constants(MediumParams(eta=1.33, g=1.0, sigma_s=1.0, sigma_a=0.0))

    def test_flip_zb(self):
        params = MediumParams.from_albedo(1.33, 0.0, 0.9)
        verbatim = derive_constants(params, VERBATIM)
        flipped = derive_constants(params, SignConvention(flip_zb=True))
        assert flipped.z_b == -verbatim.z_b


class TestSignConvention:

    @pytest.mark.parametrize("flags", [0, 1, 2, 3])
    def test_flags_round_trip(self, flags):
        assert SignConvention.from_flags(flags).flags == flags

    def test_default_is_verbatim(self):
        assert SignConvention() == VERBATIM
        assert VERBATIM.flags == 0

    def test_default_flips_virtual_flux(self):
        assert DEFAULT_CONVENTION == SignConvention(flip_virtual_flux=True)
        assert DEFAULT_CONVENTION.flags == 2
        assert derive_constants(MediumParams.from_albedo(1.33, 0.0, 0.9)).convention == DEFAULT_CONVENTION


class TestFrozenConstants:
    """Reference values for the skin-like medium, independent of the code under test."""

    @pytest.fixture
    def consts(self):
        return derive_constants(MediumParams(eta=1.33, g=0.0, sigma_s=0.95, sigma_a=0.05))

    def test_diffusion(self, consts):
        assert consts.D == pytest.approx(0.35, rel=1e-12)
        assert consts.sigma_tr == pytest.approx(0.377964473009, rel=1e-10)

    def test_boundary(self, consts):
        assert consts.z_b == pytest.approx(-0.778945874515, rel=1e-9)
        assert consts.C_phi == pytest.approx(0.233517287675, rel=1e-9)
        assert consts.C_E == pytest.approx(0.480293348964, rel=1e-9)
