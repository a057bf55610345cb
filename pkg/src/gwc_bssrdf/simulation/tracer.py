"""Forward particle tracer for a cone of light hitting a semi-infinite slab.

Each particle enters the plane z = 0 at its cone footprint position, is
weighted by the Fresnel transmittance, and re-emerges at an exit offset drawn
from the tabulated model for every colour channel.  The carried weight is the
effective albedo at the local incidence, so the splatted image estimates the
radiant exitance of the multiply scattered light.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core.errors import InvalidParameterError
from ..core.medium import fresnel_reflectance
from ..core.rng import chunks, uniform_block
from ..model.table import BssrdfTable
from .images import save_image
from .scene import CHANNELS, SlabScene

logger = logging.getLogger(__name__)

PARTICLE_CHUNK = 1 << 16
# Distance from the cone apex to the plane along the central ray.
APEX_DISTANCE = 1.0
# Uniforms per particle: cone (2), exit radius and azimuth per channel (6).
_DRAWS = 8


@dataclass
class TraceResult:
    image: np.ndarray
    scene: SlabScene
    emitted: np.ndarray = field(default_factory=lambda: np.zeros(len(CHANNELS)))
    outside: np.ndarray = field(default_factory=lambda: np.zeros(len(CHANNELS), dtype=np.int64))
    max_transmittance: float = 1.0
    paths: dict[str, Path] = field(default_factory=dict)

    def centroid(self, channel: int) -> tuple[float, float]:
        """Exitance-weighted image centroid of one channel, in scene units."""
        plane = self.image[..., channel].astype(np.float64)
        total = plane.sum()
        if total <= 0:
            return (math.nan, math.nan)
        xs, ys = _pixel_centres(self.scene)
        return float((plane * xs[None, :]).sum() / total), float((plane * ys[:, None]).sum() / total)


def _pixel_centres(scene: SlabScene) -> tuple[np.ndarray, np.ndarray]:
    half_x, half_y = scene.half_extents
    px = scene.pixel_size
    xs = scene.center[0] - half_x + (np.arange(scene.width) + 0.5) * px
    # Row 0 is the top of the image (largest y).
    ys = scene.center[1] + half_y - (np.arange(scene.height) + 0.5) * px
    return xs, ys


def _cone_directions(scene: SlabScene, u0: np.ndarray, u1: np.ndarray) -> np.ndarray:
    """Propagation directions uniformly distributed in the cone, shape (N, 3)."""
    cos_a = 1.0 - u0 * (1.0 - math.cos(scene.cone_half_angle))
    sin_a = np.sqrt(np.maximum(0.0, 1.0 - cos_a * cos_a))
    b = 2.0 * math.pi * u1
    axis = np.array([math.sin(scene.theta), 0.0, -math.cos(scene.theta)])
    tangent = np.array([math.cos(scene.theta), 0.0, math.sin(scene.theta)])
    bitangent = np.array([0.0, 1.0, 0.0])
    return (
        cos_a[:, None] * axis
        + (sin_a * np.cos(b))[:, None] * tangent
        + (sin_a * np.sin(b))[:, None] * bitangent
    )


def _resolve_tables(scene: SlabScene, tables: BssrdfTable | Sequence[BssrdfTable]) -> list[BssrdfTable]:
    if isinstance(tables, BssrdfTable):
        tables = [tables] * len(CHANNELS)
    tables = list(tables)
    if len(tables) != len(CHANNELS):
        raise InvalidParameterError("trace_beam needs one table or one table per channel")
    for name, table, material in zip(CHANNELS, tables, scene.materials):
        if not (math.isclose(table.eta, material.eta) and math.isclose(table.g, material.g)):
            raise InvalidParameterError(
                f"{name} table was built for eta={table.eta}, g={table.g}, "
                f"material has eta={material.eta}, g={material.g}"
            )
    return tables


def trace_beam(
    scene: SlabScene,
    tables: BssrdfTable | Sequence[BssrdfTable],
    out: str | Path | None = None,
    chunk_size: int = PARTICLE_CHUNK,
) -> TraceResult:
    """Splat ``scene.particles`` particles into a (height, width, 3) exitance image.

    With *out* the image is also written as ``out.pfm``/``out.png`` plus a JSON
    sidecar.  Every particle's random numbers depend only on the scene seed
    and its index, so *chunk_size* only changes floating-point summation order.
    """
    tables = _resolve_tables(scene, tables)
    n_pixels = scene.width * scene.height
    half_x, half_y = scene.half_extents
    px = scene.pixel_size
    weight_scale = 1.0 / (scene.particles * px * px)
    theta_cap = min(t.grids.theta.hi for t in tables)

    image = np.zeros((len(CHANNELS), n_pixels))
    emitted = np.zeros(len(CHANNELS))
    outside = np.zeros(len(CHANNELS), dtype=np.int64)
    max_transmittance = 0.0

    logger.info(
        "Tracing %d particles at %.1f deg into %dx%d pixels",
        scene.particles, math.degrees(scene.theta), scene.width, scene.height,
    )
    for start, count in chunks(scene.particles, chunk_size):
        u = uniform_block(scene.seed, start, count, draws=_DRAWS)
        direction = _cone_directions(scene, u[:, 0], u[:, 1])

        apex = np.array([
            scene.center[0] - APEX_DISTANCE * math.sin(scene.theta),
            scene.center[1],
            APEX_DISTANCE * math.cos(scene.theta),
        ])
        travel = apex[2] / -direction[:, 2]
        hit_x = apex[0] + travel * direction[:, 0]
        hit_y = apex[1] + travel * direction[:, 1]

        cos_in = np.clip(-direction[:, 2], 0.0, 1.0)
        theta_local = np.minimum(np.arccos(cos_in), theta_cap)
        heading = np.arctan2(direction[:, 1], direction[:, 0])
        cos_h, sin_h = np.cos(heading), np.sin(heading)

        # Chunk-local buffers, merged once per chunk in a fixed order.
        chunk_image = np.zeros((len(CHANNELS), n_pixels))
        for k, (table, material) in enumerate(zip(tables, scene.materials)):
            transmittance = 1.0 - np.asarray(fresnel_reflectance(material.eta, cos_in))
            max_transmittance = max(max_transmittance, float(transmittance.max()))
            rho = np.full(count, material.albedo)
            rho_eff = np.clip(np.asarray(table.effective_albedo(rho, theta_local)), 0.0, 1.0)
            if not np.any(rho_eff > 0.0):
                continue

            r, phi, _ = table.sample_exit_batch(rho, theta_local, u[:, 2 + 2 * k], u[:, 3 + 2 * k])
            offset = r / material.sigma_t
            local_x = offset * np.cos(phi)
            local_y = offset * np.sin(phi)
            exit_x = hit_x + cos_h * local_x - sin_h * local_y
            exit_y = hit_y + sin_h * local_x + cos_h * local_y

            col = np.floor((exit_x - (scene.center[0] - half_x)) / px).astype(np.int64)
            row = np.floor(((scene.center[1] + half_y) - exit_y) / px).astype(np.int64)
            inside = (col >= 0) & (col < scene.width) & (row >= 0) & (row < scene.height)
            weight = transmittance * rho_eff

            emitted[k] += weight.sum() / scene.particles
            outside[k] += int(np.count_nonzero(~inside))
            chunk_image[k] += np.bincount(
                row[inside] * scene.width + col[inside],
                weights=weight[inside] * weight_scale,
                minlength=n_pixels,
            )
        image += chunk_image

    result = TraceResult(
        image=np.moveaxis(image, 0, -1).reshape(scene.height, scene.width, len(CHANNELS)).astype(np.float32),
        scene=scene,
        emitted=emitted,
        outside=outside,
        max_transmittance=max_transmittance,
    )
    logger.info(
        "Traced: emitted energy %s, %s particles outside the frame",
        np.array2string(emitted, precision=4), outside.tolist(),
    )
    if out is not None:
        result.paths = save_image(
            out,
            result.image,
            scene.tone_map,
            metadata={"scene": scene.to_dict(), "emitted": emitted.tolist()},
        )
    return result
