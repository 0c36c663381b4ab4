"""Seeding.

Every random draw in the package comes from numpy's PCG64 bit generator fed
through a ``SeedSequence``. Derived seeds are the first 64-bit word of
``SeedSequence([seed, *keys])``, so they are platform independent.
"""

from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "numpy.random.PCG64 via SeedSequence"

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([check_seed(seed), *keys])))


def derive_seed(seed: int, *keys: int) -> int:
    ss = np.random.SeedSequence([check_seed(seed), *keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
