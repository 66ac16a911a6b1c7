"""Seeded random streams.

Every stream is derived from a master seed plus an integer key path through
``numpy.random.SeedSequence(seed, spawn_key=key)``.  The derivation depends
only on ``(seed, key)``, so a row block or a path block gets the same numbers
whichever worker draws them, and in whatever order.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

DEFAULT_BLOCK = 65536


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream addressed by ``(seed, *key)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def blocks(n: int, block: int = DEFAULT_BLOCK) -> Iterator[tuple[int, int, int]]:
    """Yield ``(index, start, stop)`` for fixed-size row blocks covering ``range(n)``."""
    if block < 1:
        raise ValueError("block size must be positive")
    for index, start in enumerate(range(0, n, block)):
        yield index, start, min(start + block, n)
