"""Seeded RNG streams.

Every stochastic component takes a 64-bit seed and derives independent
streams by hashing (seed, stream indices) through a SeedSequence feeding a
counter-based Philox generator.  The same (seed, indices) always yields the
same stream, which is what makes encoder/decoder dither synchronization and
parallel/serial equivalence work.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream_rng"]


def stream_rng(seed: int, *indices: int) -> np.random.Generator:
    """Return an independent generator for the given seed and stream indices."""
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
                                spawn_key=tuple(int(i) for i in indices))
    return np.random.Generator(np.random.Philox(ss))
