"""
Seeded random streams.

Every consumer derives its own PCG64 generator from SeedSequence([seed, *keys]),
so a stream depends only on the master seed and its integer address, never on
the order in which other streams were used.
"""
import numpy as np

# stream tags
BOOTSTRAP = 0
TREE = 1
SPLIT = 2
WEATHER = 3
SNAIL = 4


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
