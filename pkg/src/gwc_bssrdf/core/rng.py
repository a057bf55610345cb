"""Counter-based random streams.

Point ``i`` of a run seeded with ``seed`` always receives the same uniforms,
whichever chunk or worker processes it.
"""

from __future__ import annotations

import numpy as np

# Uniform doubles reserved per point.
DRAWS_PER_POINT = 4


def uniform_block(seed: int, start: int, count: int, draws: int = DRAWS_PER_POINT) -> np.ndarray:
    """Uniforms in [0, 1) for points ``start .. start + count - 1``, shape (count, draws).

    Philox produces four 64-bit words per counter increment, so point ``i``
    occupies counter ``i * ceil(draws / 4)``.
    """
    if count < 0 or start < 0:
        raise ValueError("start and count must be non-negative")
    blocks = -(-draws // 4)
    bit_generator = np.random.Philox(key=seed, counter=start * blocks)
    generator = np.random.Generator(bit_generator)
    values = generator.random(count * blocks * 4).reshape(count, blocks * 4)
    return values[:, :draws]


def chunks(total: int, size: int):
    """Yield ``(start, count)`` pairs covering ``range(total)``."""
    for start in range(0, total, size):
        yield start, min(size, total - start)
