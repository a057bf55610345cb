"""Safeguarded Newton iteration on monotone functions."""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from ..core.errors import ConvergenceError

MAX_ITERATIONS = 64

ArrayFn = Callable[[np.ndarray], np.ndarray]


def newton_bisection(
    fn: ArrayFn,
    dfn: ArrayFn,
    x0: ArrayLike,
    lo: ArrayLike,
    hi: ArrayLike,
    tol: float = 1e-12,
    max_iter: int = MAX_ITERATIONS,
) -> np.ndarray:
    """Solve ``fn(x) = 0`` element-wise for non-decreasing *fn* on ``[lo, hi]``.

    Newton steps that leave the bracket, or that meet a non-positive
    derivative, are replaced by bisection, and every eighth step bisects
    unconditionally.
    """
    x, lo, hi = np.broadcast_arrays(
        np.asarray(x0, dtype=np.float64),
        np.asarray(lo, dtype=np.float64),
        np.asarray(hi, dtype=np.float64),
    )
    x, lo, hi = x.copy(), lo.copy(), hi.copy()
    done = np.zeros(x.shape, dtype=bool)

    for step in range(max_iter):
        outside = (x < lo) | (x > hi) | ~np.isfinite(x)
        x = np.where(outside & ~done, 0.5 * (lo + hi), x)

        f = fn(x)
        width = hi - lo
        done |= (np.abs(f) <= tol) | (width <= 4.0 * np.finfo(np.float64).eps * np.maximum(1.0, np.abs(x)))
        if done.all():
            return x

        lo = np.where(~done & (f < 0.0), x, lo)
        hi = np.where(~done & (f > 0.0), x, hi)

        d = dfn(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            stepped = np.where(d > 0.0, x - f / d, 0.5 * (lo + hi))
        if step % 8 == 7:
            stepped = 0.5 * (lo + hi)
        x = np.where(done, x, stepped)

    raise ConvergenceError(f"Newton-bisection did not converge in {max_iter} iterations")
