"""Image output: little-endian PFM for linear data, tone-mapped PNG for viewing."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..core.errors import InvalidParameterError  # noqa: E402
from .scene import ToneMap  # noqa: E402

logger = logging.getLogger(__name__)


def write_pfm(path: str | Path, image: np.ndarray) -> Path:
    """Write a (H, W) or (H, W, 3) float image, top row first in memory.

    PFM stores rows bottom to top; a negative scale marks little-endian data.
    """
    image = np.asarray(image, dtype=np.float32)
    if image.ndim == 3 and image.shape[2] == 3:
        kind = b"PF"
    elif image.ndim == 2:
        kind = b"Pf"
    else:
        raise InvalidParameterError(f"PFM needs (H, W) or (H, W, 3) data, got {image.shape}")
    height, width = image.shape[:2]
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(kind + b"\n")
        fh.write(f"{width} {height}\n".encode())
        fh.write(b"-1.0\n")
        fh.write(np.ascontiguousarray(image[::-1], dtype="<f4").tobytes())
    return path


def read_pfm(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        kind = fh.readline().strip()
        if kind not in (b"PF", b"Pf"):
            raise InvalidParameterError(f"{path}: not a PFM file")
        width, height = (int(v) for v in fh.readline().split())
        scale = float(fh.readline().strip())
        dtype = "<f4" if scale < 0 else ">f4"
        channels = 3 if kind == b"PF" else 1
        data = np.frombuffer(fh.read(), dtype=dtype, count=width * height * channels)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return data.reshape(shape)[::-1].astype(np.float32)


def tone_map(image: np.ndarray, params: ToneMap) -> np.ndarray:
    mapped = np.clip(np.asarray(image, dtype=np.float64) * params.exposure, 0.0, None)
    return np.clip(mapped ** (1.0 / params.gamma), 0.0, 1.0)


def write_png(path: str | Path, image: np.ndarray, params: ToneMap, cmap: str | None = None) -> Path:
    """Tone-map and save; scalar fields go through *cmap* (default ``magma``)."""
    path = Path(path)
    mapped = tone_map(image, params)
    if mapped.ndim == 2:
        plt.imsave(path, mapped, cmap=cmap or "magma", vmin=0.0, vmax=1.0)
    else:
        plt.imsave(path, mapped)
    return path


def save_image(stem: str | Path, image: np.ndarray, params: ToneMap, metadata: dict | None = None) -> dict[str, Path]:
    """Write ``stem.pfm``, ``stem.png`` and a ``stem.json`` sidecar with the tone mapping."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    paths = {
        "pfm": write_pfm(stem.with_suffix(".pfm"), image),
        "png": write_png(stem.with_suffix(".png"), image, params),
        "json": stem.with_suffix(".json"),
    }
    sidecar = {"tone_map": {"exposure": params.exposure, "gamma": params.gamma}, **(metadata or {})}
    with open(paths["json"], "w") as fh:
        json.dump(sidecar, fh, indent=2)
    logger.info("Wrote %s", ", ".join(str(p) for p in paths.values()))
    return paths
