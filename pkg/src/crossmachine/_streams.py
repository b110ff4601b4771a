"""Seeded random streams split into fixed-size blocks.

Monte Carlo routines draw their repetitions block by block, each block from a
generator keyed on ``(seed, block index)``. Counts are integers summed over
blocks, so the result does not depend on how (or whether) blocks are run in
parallel.
"""

from __future__ import annotations

from collections.abc import Iterator

import numpy as np

BLOCK = 1 << 16


def block_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def blocks(seed: int, reps: int, block: int = BLOCK) -> Iterator[tuple[np.random.Generator, int]]:
    """Yield ``(generator, size)`` pairs covering ``reps`` draws."""
    index = 0
    remaining = int(reps)
    while remaining > 0:
        size = min(block, remaining)
        yield block_rng(seed, index), size
        remaining -= size
        index += 1
