"""Material parameters, dielectric Fresnel terms and the diffusion constants.

Fresnel moment convention
-------------------------
The k-th Fresnel moment is

    F_k(eta) = integral over theta in [0, pi/2] of F_r(eta, cos theta) sin theta cos^k theta

i.e. ``integral_0^1 F_r(eta, mu) mu^k dmu``, evaluated by composite Simpson
quadrature on :data:`FRESNEL_MOMENT_NODES` nodes in mu.  The same convention
feeds the oracle and the table builder, so it cancels in every model-vs-oracle
comparison.  With this convention F_1 <= 1/2 and F_2 <= 1/3 for any eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import simpson

from .errors import InvalidParameterError

FRESNEL_MOMENT_NODES = 4097


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignConvention:
    """Signs of the boundary offset and of the virtual-source flux.

    ``flip_zb`` negates the extrapolated-boundary offset z_b.
    ``flip_virtual_flux`` uses ``-z_v = z_r - 2 z_b`` instead of ``z_r + 2 z_b``
    as the virtual-source factor of the vector irradiance term.
    """

    flip_zb: bool = False
    flip_virtual_flux: bool = False

    @property
    def flags(self) -> int:
        return int(self.flip_zb) | (int(self.flip_virtual_flux) << 1)

    @classmethod
    def from_flags(cls, flags: int) -> SignConvention:
        return cls(flip_zb=bool(flags & 1), flip_virtual_flux=bool(flags & 2))

    def label(self) -> str:
        parts = [
            "zb+" if self.flip_zb else "zb-",
            "E-" if self.flip_virtual_flux else "E+",
        ]
        return "/".join(parts)


# Negative z_b, virtual flux factor z_r + 2 z_b.
VERBATIM = SignConvention()
# Negative z_b, virtual flux factor -z_v; used for every build, oracle and
# validation unless a convention is passed explicitly.
DEFAULT_CONVENTION = SignConvention(flip_virtual_flux=True)


@dataclass(frozen=True)
class MediumParams:
    """A homogeneous sub-surface scattering material."""

    eta: float
    g: float
    sigma_s: float
    sigma_a: float

    def __post_init__(self) -> None:
        values = (self.eta, self.g, self.sigma_s, self.sigma_a)
        if not all(math.isfinite(v) for v in values):
            raise InvalidParameterError(f"non-finite medium parameter in {self}")
        if self.eta <= 1.0:
            raise InvalidParameterError(f"eta must be > 1, got {self.eta}")
        if not -1.0 <= self.g <= 1.0:
            raise InvalidParameterError(f"g must lie in [-1, 1], got {self.g}")
        if self.sigma_s < 0 or self.sigma_a < 0:
            raise InvalidParameterError("sigma_s and sigma_a must be non-negative")
        if self.sigma_s + self.sigma_a <= 0:
            raise InvalidParameterError("sigma_s + sigma_a must be positive")

    @property
    def sigma_t(self) -> float:
        return self.sigma_s + self.sigma_a

    @property
    def albedo(self) -> float:
        return self.sigma_s / self.sigma_t

    @classmethod
    def from_albedo(cls, eta: float, g: float, rho: float, sigma_t: float = 1.0) -> MediumParams:
        """Unit-scale material used by the table: sigma_t fixed, albedo rho."""
        if not 0.0 <= rho <= 1.0:
            raise InvalidParameterError(f"albedo must lie in [0, 1], got {rho}")
        return cls(eta=eta, g=g, sigma_s=rho * sigma_t, sigma_a=(1.0 - rho) * sigma_t)


@dataclass(frozen=True)
class DerivedConstants:
    """Reduced coefficients and dipole boundary constants of a medium."""

    eta: float
    sigma_t: float
    sigma_s_prime: float
    sigma_t_prime: float
    rho_prime: float
    D: float
    sigma_tr: float
    z_b: float
    C_phi: float
    C_E: float
    convention: SignConvention = DEFAULT_CONVENTION


# ---------------------------------------------------------------------------
# Fresnel
# ---------------------------------------------------------------------------

def fresnel_reflectance(eta: float, cos_theta: ArrayLike) -> np.ndarray | float:
    """Unpolarized dielectric reflectance for relative index *eta* (transmitted / incident).

    Returns 1 under total internal reflection, which only happens for eta < 1.
    """
    cos_i = np.clip(np.asarray(cos_theta, dtype=np.float64), 0.0, 1.0)
    sin2_t = (1.0 - cos_i * cos_i) / (eta * eta)
    tir = sin2_t >= 1.0
    cos_t = np.sqrt(np.maximum(1.0 - sin2_t, 0.0))

    with np.errstate(divide="ignore", invalid="ignore"):
        r_parl = (eta * cos_i - cos_t) / (eta * cos_i + cos_t)
        r_perp = (cos_i - eta * cos_t) / (cos_i + eta * cos_t)
        fr = 0.5 * (r_parl * r_parl + r_perp * r_perp)

    fr = np.where(tir | ~np.isfinite(fr), 1.0, fr)
    return fr[()] if fr.ndim == 0 else fr


@lru_cache(maxsize=256)
def fresnel_moment(eta: float, k: int) -> float:
    """k-th Fresnel moment (k in {1, 2}); see the module docstring for the convention."""
    if k not in (1, 2):
        raise InvalidParameterError(f"Fresnel moment order must be 1 or 2, got {k}")
    if eta <= 1.0:
        raise InvalidParameterError(f"eta must be > 1, got {eta}")
    mu = np.linspace(0.0, 1.0, FRESNEL_MOMENT_NODES)
    return float(simpson(fresnel_reflectance(eta, mu) * mu**k, x=mu))


def refract_cos(eta: float, theta: float) -> tuple[float, float]:
    """Sine and cosine of the refracted angle for incidence *theta* from outside."""
    sin_p = math.sin(theta) / eta
    cos_p = math.sqrt(max(0.0, 1.0 - sin_p * sin_p))
    return sin_p, cos_p


# ---------------------------------------------------------------------------
# Diffusion constants
# ---------------------------------------------------------------------------

def derive_constants(
    params: MediumParams, convention: SignConvention = DEFAULT_CONVENTION
) -> DerivedConstants:
    sigma_s_prime = params.sigma_s * (1.0 - params.g)
    sigma_t_prime = sigma_s_prime + params.sigma_a
    if sigma_t_prime <= 0.0:
        raise InvalidParameterError("reduced extinction sigma_t' is zero")

    rho_prime = sigma_s_prime / sigma_t_prime
    D = (2.0 * params.sigma_a + sigma_s_prime) / (3.0 * sigma_t_prime * sigma_t_prime)
    sigma_tr = math.sqrt(params.sigma_a / D)

    f1 = fresnel_moment(params.eta, 1)
    f2 = fresnel_moment(params.eta, 2)
    z_b = -2.0 * D * (1.0 + 3.0 * f2) / (1.0 - 2.0 * f1)
    if convention.flip_zb:
        z_b = -z_b

    return DerivedConstants(
        eta=params.eta,
        sigma_t=params.sigma_t,
        sigma_s_prime=sigma_s_prime,
        sigma_t_prime=sigma_t_prime,
        rho_prime=rho_prime,
        D=D,
        sigma_tr=sigma_tr,
        z_b=z_b,
        C_phi=(1.0 - 2.0 * f1) / 4.0,
        C_E=(1.0 - 3.0 * f2) / 2.0,
        convention=convention,
    )
