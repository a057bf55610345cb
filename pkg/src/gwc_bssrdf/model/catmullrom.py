"""Nonuniform Catmull-Rom splines: weights, tensor interpolation, integration, sampling.

Segment ``[x_i, x_{i+1}]`` is a cubic Hermite curve whose end derivatives are
central differences over the neighbouring nodes, or one-sided differences at
the first and last node.  Every operation here is linear in the node values,
which is what lets the table interpolate cumulative integrals directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from ..core.errors import InvalidParameterError, OutOfDomainError, ZeroMassError
from .solvers import newton_bisection


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid1D:
    """Strictly increasing tabulation nodes."""

    nodes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=np.float64)
        if nodes.ndim != 1 or nodes.shape[0] < 2:
            raise InvalidParameterError("a grid needs at least two nodes")
        if not np.all(np.isfinite(nodes)) or not np.all(np.diff(nodes) > 0):
            raise InvalidParameterError("grid nodes must be finite and strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return self.nodes.shape[0]

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    def contains(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (x >= self.lo) & (x <= self.hi)


@dataclass(frozen=True)
class SplineWeights:
    """Four weights applied to nodes ``offset .. offset + 3``."""

    offset: int
    w: tuple[float, float, float, float]


# ---------------------------------------------------------------------------
# Weights and interpolation
# ---------------------------------------------------------------------------

def cr_weights_batch(grid: Grid1D, x: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """Offsets (N,) and weights (N, 4) for every query in *x*."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    nodes = grid.nodes
    size = nodes.shape[0]
    if not np.all(grid.contains(x)):
        bad = x[~grid.contains(x)][0]
        raise OutOfDomainError(f"{bad} outside grid span [{grid.lo}, {grid.hi}]")

    idx = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, size - 2)
    x0 = nodes[idx]
    x1 = nodes[idx + 1]
    t = (x - x0) / (x1 - x0)
    t2 = t * t
    t3 = t2 * t

    w = np.zeros((x.shape[0], 4))
    w[:, 1] = 2 * t3 - 3 * t2 + 1
    w[:, 2] = -2 * t3 + 3 * t2
    h0 = t3 - 2 * t2 + t
    h1 = t3 - t2

    has_left = idx > 0
    left_scale = np.where(has_left, (x1 - x0) / (x1 - nodes[np.maximum(idx - 1, 0)]), 1.0)
    d0 = h0 * left_scale
    w[:, 0] = np.where(has_left, -d0, 0.0)
    w[:, 1] -= np.where(has_left, 0.0, d0)
    w[:, 2] += d0

    has_right = idx + 2 < size
    right_scale = np.where(has_right, (x1 - x0) / (nodes[np.minimum(idx + 2, size - 1)] - x0), 1.0)
    d1 = h1 * right_scale
    w[:, 1] -= d1
    w[:, 2] += np.where(has_right, 0.0, d1)
    w[:, 3] = np.where(has_right, d1, 0.0)

    return idx - 1, w


def cr_weights(grid: Grid1D, x: float) -> SplineWeights:
    offset, w = cr_weights_batch(grid, x)
    return SplineWeights(offset=int(offset[0]), w=tuple(float(v) for v in w[0]))


def interp_nd(table: np.ndarray, grids: tuple[Grid1D, ...], coords: tuple[ArrayLike, ...]) -> np.ndarray:
    """Tensor-product interpolation of *table* at broadcast query coordinates."""
    if table.ndim != len(grids) or len(coords) != len(grids):
        raise InvalidParameterError("table, grids and coordinates disagree in dimension")
    arrays = np.broadcast_arrays(*(np.asarray(c, dtype=np.float64) for c in coords))
    shape = arrays[0].shape
    per_axis = [cr_weights_batch(g, a.reshape(-1)) for g, a in zip(grids, arrays)]

    out = np.zeros(int(np.prod(shape, dtype=np.int64)))
    for corner in itertools.product(range(4), repeat=len(grids)):
        weight = np.ones_like(out)
        index = []
        for axis, k in enumerate(corner):
            offset, w = per_axis[axis]
            weight = weight * w[:, k]
            index.append(np.clip(offset + k, 0, table.shape[axis] - 1))
        out += weight * table[tuple(index)]
    return out.reshape(shape)


def interp_3d(table: np.ndarray, grids: tuple[Grid1D, Grid1D, Grid1D], x: tuple[ArrayLike, ArrayLike, ArrayLike]) -> np.ndarray | float:
    value = interp_nd(table, grids, x)
    return value[()] if value.ndim == 0 else value


def eval_1d(grid: Grid1D, values: ArrayLike, x: ArrayLike) -> np.ndarray:
    return interp_nd(np.asarray(values, dtype=np.float64), (grid,), (x,))


# ---------------------------------------------------------------------------
# Segment polynomials
# ---------------------------------------------------------------------------

Coeffs = tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def _end_slopes(nodes: np.ndarray, f: np.ndarray, i: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Segment end derivatives scaled to the unit parameter t; *f* is (..., n)."""
    n = nodes.shape[0]
    width = nodes[i + 1] - nodes[i]
    f0 = np.take_along_axis(f, i[..., None], -1)[..., 0]
    f1 = np.take_along_axis(f, (i + 1)[..., None], -1)[..., 0]
    fm = np.take_along_axis(f, np.maximum(i - 1, 0)[..., None], -1)[..., 0]
    fp = np.take_along_axis(f, np.minimum(i + 2, n - 1)[..., None], -1)[..., 0]
    d0 = np.where(i > 0, width * (f1 - fm) / (nodes[i + 1] - nodes[np.maximum(i - 1, 0)]), f1 - f0)
    d1 = np.where(i + 2 < n, width * (fp - f0) / (nodes[np.minimum(i + 2, n - 1)] - nodes[i]), f1 - f0)
    return d0, d1


def _hermite_coeffs(f0, f1, d0, d1) -> Coeffs:
    """Monomial coefficients in t of the unit-parameter Hermite segment."""
    f0, f1, d0, d1 = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (f0, f1, d0, d1)))
    return f0, d0, 3.0 * (f1 - f0) - 2.0 * d0 - d1, d0 + d1 + 2.0 * (f0 - f1)


def _poly_value(t, coeffs: Coeffs) -> np.ndarray:
    c0, c1, c2, c3 = coeffs
    return c0 + t * (c1 + t * (c2 + t * c3))


def _poly_slope(t, coeffs: Coeffs) -> np.ndarray:
    _, c1, c2, c3 = coeffs
    return c1 + t * (2.0 * c2 + 3.0 * t * c3)


def _poly_integral(t, coeffs: Coeffs) -> np.ndarray:
    c0, c1, c2, c3 = coeffs
    return t * (c0 + t * (c1 / 2.0 + t * (c2 / 3.0 + t * c3 / 4.0)))


def _expand(coeffs: Coeffs) -> Coeffs:
    return tuple(c[..., None] for c in coeffs)


def _turning_points(coeffs: Coeffs) -> np.ndarray:
    """Stationary points of each cubic inside (0, 1), padded with 1; shape (..., 2)."""
    _, c1, c2, c3 = coeffs
    a = 3.0 * c3
    b = 2.0 * c2
    disc = b * b - 4.0 * a * c1
    with np.errstate(divide="ignore", invalid="ignore"):
        q = -0.5 * (b + np.where(b >= 0.0, 1.0, -1.0) * np.sqrt(np.maximum(disc, 0.0)))
        roots = np.stack([q / a, c1 / q], axis=-1)
    inside = (disc >= 0.0)[..., None] & np.isfinite(roots) & (roots > 0.0) & (roots < 1.0)
    return np.where(inside, roots, 1.0)


def _dips_below_zero(coeffs: Coeffs) -> np.ndarray:
    """Segments whose cubic goes negative somewhere on [0, 1]."""
    lowest = np.min(_poly_value(_turning_points(coeffs), _expand(coeffs)), axis=-1)
    return (lowest < 0.0) | (coeffs[0] < 0.0) | (_poly_value(1.0, coeffs) < 0.0)


def _sign_breaks(coeffs: Coeffs) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints (..., 7) splitting each segment where its cubic changes sign.

    Returns the sorted breakpoints and a (..., 6) mask of the pieces on which
    the cubic is positive.
    """
    shape = coeffs[0].shape
    knots = np.sort(np.concatenate(
        [np.zeros(shape + (1,)), _turning_points(coeffs), np.ones(shape + (1,))], axis=-1
    ), axis=-1)
    wide = _expand(coeffs)
    lo, hi = knots[..., :-1], knots[..., 1:]
    p_lo, p_hi = _poly_value(lo, wide), _poly_value(hi, wide)

    # The cubic is monotone between knots, so each piece holds at most one root.
    crossing = p_lo * p_hi < 0.0
    roots = hi.copy()
    if np.any(crossing):
        picked = tuple(np.broadcast_to(c, crossing.shape)[crossing] for c in wide)
        sign = np.where(p_hi[crossing] > p_lo[crossing], 1.0, -1.0)
        a, b = lo[crossing], hi[crossing]
        guess = a + (b - a) * p_lo[crossing] / (p_lo[crossing] - p_hi[crossing])
        roots[crossing] = newton_bisection(
            lambda t: sign * _poly_value(t, picked),
            lambda t: sign * _poly_slope(t, picked),
            guess, a, b,
        )

    breaks = np.sort(np.concatenate([knots, roots], axis=-1), axis=-1)
    middle = 0.5 * (breaks[..., :-1] + breaks[..., 1:])
    return breaks, _poly_value(middle, wide) > 0.0


def _positive_integral(t, coeffs: Coeffs, breaks: np.ndarray, positive: np.ndarray) -> np.ndarray:
    """Integral of ``max(p, 0)`` from 0 to *t* for every segment."""
    t = np.asarray(t, dtype=np.float64)[..., None]
    wide = _expand(coeffs)
    lo, hi = breaks[..., :-1], breaks[..., 1:]
    pieces = _poly_integral(np.clip(t, lo, hi), wide) - _poly_integral(lo, wide)
    return np.sum(np.where(positive, pieces, 0.0), axis=-1)


def _row_coeffs(grid: Grid1D, f: np.ndarray) -> Coeffs:
    nodes = grid.nodes
    width = np.diff(nodes)
    central = (f[..., 2:] - f[..., :-2]) / (nodes[2:] - nodes[:-2])
    d0 = np.empty_like(f[..., :-1])
    d1 = np.empty_like(f[..., :-1])
    d0[..., 0] = f[..., 1] - f[..., 0]
    d0[..., 1:] = width[1:] * central
    d1[..., :-1] = width[:-1] * central
    d1[..., -1] = f[..., -1] - f[..., -2]
    return _hermite_coeffs(f[..., :-1], f[..., 1:], d0, d1)


def negative_lobes(grid: Grid1D, values: ArrayLike) -> np.ndarray | bool:
    """Rows (last axis along *grid*) whose spline goes below zero anywhere on the span."""
    f = np.asarray(values, dtype=np.float64)
    if f.shape[-1] != grid.nodes.shape[0]:
        raise InvalidParameterError("values do not match the grid length")
    found = np.any(_dips_below_zero(_row_coeffs(grid, f)), axis=-1)
    return found[()] if np.ndim(found) == 0 else found


# ---------------------------------------------------------------------------
# Integration and sampling
# ---------------------------------------------------------------------------

def integrate_1d(
    grid: Grid1D,
    values: ArrayLike,
    weight: ArrayLike | None = None,
    clamp_negative: bool = False,
) -> tuple[np.ndarray, np.ndarray | float]:
    """Running integral of the spline through ``values * weight`` along the last axis.

    With *clamp_negative* the node products are clamped at 0 and each segment
    contributes the integral of the positive part of its cubic, so the result
    is non-decreasing.  This is the cumulative the samplers invert.
    """
    f = np.asarray(values, dtype=np.float64)
    if weight is not None:
        f = f * np.asarray(weight, dtype=np.float64)
    if clamp_negative:
        f = np.maximum(f, 0.0)
    if f.shape[-1] != grid.nodes.shape[0]:
        raise InvalidParameterError("values do not match the grid length")

    width = np.broadcast_to(np.diff(grid.nodes), f[..., 1:].shape)
    coeffs = _row_coeffs(grid, f)
    pieces = _poly_integral(1.0, coeffs) * width
    if clamp_negative:
        dips = _dips_below_zero(coeffs)
        if np.any(dips):
            picked = tuple(c[dips] for c in coeffs)
            breaks, positive = _sign_breaks(picked)
            pieces[dips] = width[dips] * _positive_integral(1.0, picked, breaks, positive)

    cumulative = np.zeros_like(f)
    cumulative[..., 1:] = np.cumsum(pieces, axis=-1)
    total = cumulative[..., -1]
    return cumulative, total[()] if np.ndim(total) == 0 else total


def sample_1d_batch(
    grid: Grid1D, values: ArrayLike, cumulative: ArrayLike, u: ArrayLike
) -> tuple[np.ndarray, np.ndarray]:
    """Invert the clamped spline CDF for every ``u``.

    *values* and *cumulative* are either one row shared by all queries or one
    row per query; *cumulative* comes from ``integrate_1d(..., clamp_negative=True)``.
    Returns sample positions and densities ``max(f(x), 0) / total``.
    """
    nodes = grid.nodes
    n = nodes.shape[0]
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    f = np.maximum(np.atleast_2d(np.asarray(values, dtype=np.float64)), 0.0)
    cdf = np.atleast_2d(np.asarray(cumulative, dtype=np.float64))
    shared = f.shape[0] == 1
    if not shared and f.shape[0] != u.shape[0]:
        raise InvalidParameterError("one density row per query, or a single shared row")

    total = cdf[:, -1]
    if np.any(~(total > 0.0)):
        raise ZeroMassError("tabulated density has zero total mass")

    target = u * total
    if shared:
        seg = np.searchsorted(cdf[0], target, side="right") - 1
        f = np.broadcast_to(f, (u.shape[0], n))
        cdf = np.broadcast_to(cdf, (u.shape[0], n))
        total = np.broadcast_to(total, u.shape)
    else:
        seg = (cdf <= target[:, None]).sum(axis=1) - 1
    seg = np.clip(seg, 0, n - 2)

    width = nodes[seg + 1] - nodes[seg]
    f0 = np.take_along_axis(f, seg[:, None], 1)[:, 0]
    f1 = np.take_along_axis(f, (seg + 1)[:, None], 1)[:, 0]
    d0, d1 = _end_slopes(nodes, f, seg)
    coeffs = _hermite_coeffs(f0, f1, d0, d1)
    breaks, positive = _sign_breaks(coeffs)
    base = np.take_along_axis(cdf, seg[:, None], 1)[:, 0]
    local = (target - base) / width

    with np.errstate(divide="ignore", invalid="ignore"):
        guess = np.where(
            f0 != f1,
            (f0 - np.sqrt(np.maximum(0.0, f0 * f0 + 2.0 * local * (f1 - f0)))) / (f0 - f1),
            local / f0,
        )

    def residual(t: np.ndarray) -> np.ndarray:
        return (base + width * _positive_integral(t, coeffs, breaks, positive)) / total - u

    def slope(t: np.ndarray) -> np.ndarray:
        return width * np.maximum(_poly_value(t, coeffs), 0.0) / total

    t = newton_bisection(residual, slope, guess, 0.0, 1.0)
    density = np.maximum(_poly_value(t, coeffs), 0.0)
    return nodes[seg] + width * t, density / total


def sample_1d(
    grid: Grid1D, values: ArrayLike, cumulative: ArrayLike, u: float
) -> tuple[float, float]:
    x, pdf = sample_1d_batch(grid, values, cumulative, u)
    return float(x[0]), float(pdf[0])


def pdf_1d(grid: Grid1D, values: ArrayLike, total: float, x: ArrayLike) -> np.ndarray:
    """Density realised by :func:`sample_1d_batch` at *x* (zero outside the span).

    *total* is the clamped mass from ``integrate_1d(..., clamp_negative=True)``.
    """
    x = np.asarray(x, dtype=np.float64)
    inside = grid.contains(x)
    safe = np.where(inside, x, grid.lo)
    clamped = np.maximum(np.asarray(values, dtype=np.float64), 0.0)
    value = np.maximum(eval_1d(grid, clamped, safe), 0.0) / total
    return np.where(inside, value, 0.0)
