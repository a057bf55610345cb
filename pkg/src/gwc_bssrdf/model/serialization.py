"""Binary ``.bsrt`` table format and its JSON sidecar.

Layout (little-endian)::

    magic     4s    b"BSRT"
    version   u32   1
    flags     u32   bit 0: z_b sign variant, bit 1: virtual flux sign variant
    eta, g    f64 x 2
    dims      u32 x 3   (n_rho, n_theta, n_r)
    grids     f64 x (n_rho + n_theta + n_r)
    A, beta, c, cum_energy   f32 x (n_rho * n_theta * n_r) each, rho-major
    rho_eff   f32 x (n_rho * n_theta)
    clamps    u64
"""

from __future__ import annotations

import json
import logging
import struct
from pathlib import Path
from typing import Any

import numpy as np

from ..core.errors import CorruptHeaderError, DimensionMismatchError, InvariantViolationError
from ..core.medium import SignConvention
from ..core.results import BuildStats
from .table import BssrdfTable, TableGrids
from .wrapped_cauchy import AnchorSet

logger = logging.getLogger(__name__)

MAGIC = b"BSRT"
VERSION = 1

_HEADER = struct.Struct("<4sIIdd3I")
_CLAMPS = struct.Struct("<Q")
_MAX_DIM = 1 << 16
# Rounding slack allowed on the stored invariants.
_INVARIANT_TOL = 1e-5


def serialize(table: BssrdfTable) -> bytes:
    n_rho, n_theta, n_r = table.shape
    parts = [
        _HEADER.pack(MAGIC, VERSION, table.convention.flags, table.eta, table.g, n_rho, n_theta, n_r),
        table.grids.rho.nodes.astype("<f8").tobytes(),
        table.grids.theta.nodes.astype("<f8").tobytes(),
        table.grids.r.nodes.astype("<f8").tobytes(),
    ]
    for channel in (table.A, table.beta, table.c, table.cum_energy, table.rho_eff):
        parts.append(np.ascontiguousarray(channel, dtype="<f4").tobytes())
    clamps = table.stats.clamped_cells + table.stats.complex_root_cells
    parts.append(_CLAMPS.pack(clamps))
    return b"".join(parts)


def payload_size(shape: tuple[int, int, int]) -> int:
    """Bytes of f32 channel data (A, beta, c, cum_energy) for a table shape."""
    n_rho, n_theta, n_r = shape
    return 4 * 4 * n_rho * n_theta * n_r


def _read(buffer: memoryview, offset: int, dtype: str, count: int) -> tuple[np.ndarray, int]:
    size = np.dtype(dtype).itemsize * count
    if offset + size > len(buffer):
        raise CorruptHeaderError(
            f"stream truncated: need {offset + size} bytes, have {len(buffer)}"
        )
    array = np.frombuffer(buffer, dtype=dtype, count=count, offset=offset).astype(dtype[1:])
    return array, offset + size


def _check_invariants(A: np.ndarray, beta: np.ndarray, c: np.ndarray, cum: np.ndarray, rho_eff: np.ndarray) -> None:
    for name, array in (("A", A), ("beta", beta), ("c", c), ("cum_energy", cum), ("rho_eff", rho_eff)):
        if not np.all(np.isfinite(array)):
            raise InvariantViolationError(f"{name} holds non-finite values")
    if np.any(A < 0) or np.any(beta < 0):
        raise InvariantViolationError("A and beta must be non-negative")
    if np.any(c < 0) or np.any(c >= 1):
        raise InvariantViolationError("c must lie in [0, 1)")
    if np.any(beta > A * (1.0 + _INVARIANT_TOL) + _INVARIANT_TOL):
        raise InvariantViolationError("beta exceeds A")
    if np.any(np.diff(cum, axis=-1) < -_INVARIANT_TOL * np.maximum(cum[..., 1:], 1.0)):
        raise InvariantViolationError("cum_energy decreases along r")
    if not np.array_equal(rho_eff, cum[..., -1]):
        raise InvariantViolationError("rho_eff differs from cum_energy at r_max")


def deserialize(data: bytes) -> BssrdfTable:
    buffer = memoryview(data)
    if len(buffer) < _HEADER.size:
        raise CorruptHeaderError(f"stream truncated: {len(buffer)} bytes is shorter than the header")
    magic, version, flags, eta, g, n_rho, n_theta, n_r = _HEADER.unpack_from(buffer, 0)
    if magic != MAGIC:
        raise CorruptHeaderError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CorruptHeaderError(f"unsupported version {version}")
    if flags & ~0b11:
        raise CorruptHeaderError(f"unknown flag bits {flags:#x}")
    if not all(2 <= n <= _MAX_DIM for n in (n_rho, n_theta, n_r)):
        raise DimensionMismatchError(f"implausible dimensions {(n_rho, n_theta, n_r)}")

    cells = n_rho * n_theta * n_r
    expected = (
        _HEADER.size + 8 * (n_rho + n_theta + n_r) + 4 * (4 * cells + n_rho * n_theta) + _CLAMPS.size
    )
    offset = _HEADER.size
    rho, offset = _read(buffer, offset, "<f8", n_rho)
    theta, offset = _read(buffer, offset, "<f8", n_theta)
    r, offset = _read(buffer, offset, "<f8", n_r)
    channels = []
    for _ in range(4):
        channel, offset = _read(buffer, offset, "<f4", cells)
        channels.append(channel.reshape(n_rho, n_theta, n_r))
    rho_eff, offset = _read(buffer, offset, "<f4", n_rho * n_theta)
    if offset + _CLAMPS.size > len(buffer):
        raise CorruptHeaderError("stream truncated before the clamp count")
    (clamps,) = _CLAMPS.unpack_from(buffer, offset)
    if len(buffer) != expected:
        raise DimensionMismatchError(
            f"stream holds {len(buffer)} bytes but dimensions {(n_rho, n_theta, n_r)} need {expected}"
        )

    try:
        grids = TableGrids.from_arrays(rho, theta, r)
    except ValueError as exc:
        raise InvariantViolationError(f"invalid grid nodes: {exc}") from exc
    A, beta, c, cum = channels
    rho_eff = rho_eff.reshape(n_rho, n_theta)
    _check_invariants(A, beta, c, cum, rho_eff)

    return BssrdfTable(
        eta=eta,
        g=g,
        grids=grids,
        A=A,
        beta=beta,
        c=c,
        cum_energy=cum,
        rho_eff=rho_eff,
        stats=BuildStats(total_cells=cells, clamped_cells=int(clamps)),
        convention=SignConvention.from_flags(flags),
    )


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def table_metadata(table: BssrdfTable) -> dict[str, Any]:
    return {
        "format": MAGIC.decode(),
        "version": VERSION,
        "eta": table.eta,
        "g": table.g,
        "dims": list(table.shape),
        "flags": table.convention.flags,
        "sign_convention": {
            "flip_zb": table.convention.flip_zb,
            "flip_virtual_flux": table.convention.flip_virtual_flux,
        },
        "anchors": list(table.anchors.cosines),
        "build_samples": table.build_samples,
        "r_max": table.grids.r_max,
        "payload_bytes": payload_size(table.shape),
        "build_stats": table.stats.to_dict(),
    }


def save(table: BssrdfTable, path: str | Path, sidecar: bool = True) -> Path:
    """Write *table* to *path* and, unless disabled, the JSON sidecar next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = serialize(table)
    path.write_bytes(data)
    logger.info("Wrote %s (%d bytes)", path, len(data))
    if sidecar:
        with open(sidecar_path(path), "w") as fh:
            json.dump(table_metadata(table), fh, indent=2)
    return path


def load(path: str | Path) -> BssrdfTable:
    """Read a table; build statistics are restored from the sidecar when present."""
    path = Path(path)
    table = deserialize(path.read_bytes())
    meta_path = sidecar_path(path)
    if meta_path.exists():
        with open(meta_path) as fh:
            meta = json.load(fh)
        table.stats = BuildStats.from_dict(meta.get("build_stats", {}))
        table.build_samples = int(meta.get("build_samples", table.build_samples))
        if "anchors" in meta:
            table.anchors = AnchorSet(*meta["anchors"])
    return table
