"""Relative-error scoring of model values against the oracle."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

# Oracle values at or below this are excluded from relative errors.
ORACLE_FLOOR = 1e-12


class RelativeErrorScorer:
    """
    Signed relative error ``(model - oracle) / oracle``.

    Points whose oracle value does not exceed the floor would dominate the
    statistics without meaning anything; they are dropped and counted.
    """

    def __init__(self, floor: float = ORACLE_FLOOR):
        self.floor = floor

    def score(self, model: ArrayLike, oracle: ArrayLike) -> tuple[np.ndarray, int]:
        model = np.asarray(model, dtype=np.float64)
        oracle = np.asarray(oracle, dtype=np.float64)
        keep = oracle > self.floor
        return (model[keep] - oracle[keep]) / oracle[keep], int(np.count_nonzero(~keep))
