"""Planar slab scenes for the beam tracer, loaded from flat YAML files."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, ClassVar

import yaml

from ..core.errors import InvalidParameterError, SceneConfigError
from ..core.medium import MediumParams

logger = logging.getLogger(__name__)

CHANNELS = ("red", "green", "blue")


@dataclass
class ToneMap:
    """Exposure scaling followed by gamma encoding, values clipped to [0, 1]."""

    exposure: float = 1.0
    gamma: float = 2.2

    def __post_init__(self) -> None:
        if not self.exposure > 0 or not self.gamma > 0:
            raise InvalidParameterError("exposure and gamma must be positive")


@dataclass
class SlabScene:
    """A cone of light hitting the plane z = 0 of a semi-infinite slab.

    The beam arrives at polar angle ``theta`` in the x-z plane, travelling
    towards +x, so forward scattering elongates the glow along +x.  The image
    covers ``[-extent/2, extent/2]`` around ``center`` on both axes (the
    shorter image side is scaled accordingly), in the inverse unit of the
    scattering coefficients.
    """

    theta: float
    cone_half_angle: float
    materials: tuple[MediumParams, MediumParams, MediumParams]
    width: int = 256
    height: int = 256
    extent: float = 20.0
    particles: int = 1_000_000
    seed: int = 0
    center: tuple[float, float] = (0.0, 0.0)
    tone_map: ToneMap = field(default_factory=ToneMap)
    build_samples: int = 100

    MATERIAL_PRESETS: ClassVar[dict[str, dict[str, Any]]] = {
        "rgb_slab": {"eta": 1.33, "g": 0.0, "sigma_s": 1.0, "sigma_a_rgb": (0.01, 0.1, 1.0)},
        "skin_like": {"eta": 1.4, "g": 0.0, "sigma_s": 1.0, "sigma_a_rgb": (0.032, 0.17, 0.48)},
    }

    KEYS: ClassVar[frozenset[str]] = frozenset({
        "theta_deg", "cone_deg", "sigma_s", "sigma_a_rgb", "eta", "g", "width", "height",
        "extent", "particles", "seed", "exposure", "gamma", "center_x", "center_y",
        "build_samples", "preset",
    })

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta < 0.5 * math.pi:
            raise InvalidParameterError(f"beam angle must lie in [0, 90) degrees, got {math.degrees(self.theta)}")
        if not 0.0 <= self.cone_half_angle < 0.5 * math.pi:
            raise InvalidParameterError("cone half-angle must lie in [0, 90) degrees")
        if len(self.materials) != len(CHANNELS):
            raise InvalidParameterError("a scene needs one material per colour channel")
        if self.width <= 0 or self.height <= 0:
            raise InvalidParameterError("image size must be positive")
        if not self.extent > 0:
            raise InvalidParameterError("image extent must be positive")
        if self.particles <= 0:
            raise InvalidParameterError("particle count must be positive")
        if self.theta + self.cone_half_angle >= 0.5 * math.pi:
            logger.warning("cone reaches grazing incidence; directions past 90 degrees are clamped")

    @property
    def pixel_size(self) -> float:
        return self.extent / max(self.width, self.height)

    @property
    def half_extents(self) -> tuple[float, float]:
        return 0.5 * self.width * self.pixel_size, 0.5 * self.height * self.pixel_size

    @classmethod
    def from_preset(cls, name: str, theta_deg: float, **overrides: Any) -> SlabScene:
        if name not in cls.MATERIAL_PRESETS:
            raise SceneConfigError(f"unknown material preset '{name}'")
        data = {"theta_deg": theta_deg, **cls.MATERIAL_PRESETS[name], **overrides}
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SlabScene:
        unknown = set(data) - cls.KEYS
        if unknown:
            raise SceneConfigError(f"unknown scene keys: {', '.join(sorted(unknown))}")
        if "preset" in data:
            preset = cls.MATERIAL_PRESETS.get(data["preset"])
            if preset is None:
                raise SceneConfigError(f"unknown material preset '{data['preset']}'")
            data = {**preset, **{k: v for k, v in data.items() if k != "preset"}}

        try:
            sigma_a_rgb = tuple(float(v) for v in data["sigma_a_rgb"])
            sigma_s = float(data["sigma_s"])
            eta = float(data.get("eta", 1.33))
            g = float(data.get("g", 0.0))
            if len(sigma_a_rgb) != len(CHANNELS):
                raise SceneConfigError("sigma_a_rgb needs exactly three values")
            materials = tuple(
                MediumParams(eta=eta, g=g, sigma_s=sigma_s, sigma_a=sigma_a) for sigma_a in sigma_a_rgb
            )
            return cls(
                theta=math.radians(float(data["theta_deg"])),
                cone_half_angle=math.radians(float(data.get("cone_deg", 2.0))),
                materials=materials,
                width=int(data.get("width", 256)),
                height=int(data.get("height", 256)),
                extent=float(data.get("extent", 20.0)),
                particles=int(data.get("particles", 1_000_000)),
                seed=int(data.get("seed", 0)),
                center=(float(data.get("center_x", 0.0)), float(data.get("center_y", 0.0))),
                tone_map=ToneMap(
                    exposure=float(data.get("exposure", 1.0)),
                    gamma=float(data.get("gamma", 2.2)),
                ),
                build_samples=int(data.get("build_samples", 100)),
            )
        except KeyError as exc:
            raise SceneConfigError(f"missing scene key {exc.args[0]!r}") from exc
        except SceneConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise SceneConfigError(f"malformed scene: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        first = self.materials[0]
        return {
            "theta_deg": math.degrees(self.theta),
            "cone_deg": math.degrees(self.cone_half_angle),
            "sigma_s": first.sigma_s,
            "sigma_a_rgb": [m.sigma_a for m in self.materials],
            "eta": first.eta,
            "g": first.g,
            "width": self.width,
            "height": self.height,
            "extent": self.extent,
            "particles": self.particles,
            "seed": self.seed,
            "center_x": self.center[0],
            "center_y": self.center[1],
            "exposure": self.tone_map.exposure,
            "gamma": self.tone_map.gamma,
            "build_samples": self.build_samples,
        }


def load_scene(path: str | Path) -> SlabScene:
    path = Path(path)
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise SceneConfigError(f"{path}: expected a mapping of scene keys")
    data = data.get("scene", data)
    logger.info("Loaded scene %s", path)
    return SlabScene.from_dict(data)
