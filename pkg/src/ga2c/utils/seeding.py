"""Deterministic random streams derived from a single run seed."""

import numpy as np


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Create an independent generator for a (seed, key...) path.

    Streams for different key paths are statistically independent, so
    per-target or per-episode draws do not depend on evaluation order.

    Args:
        seed: Run seed.
        *keys: Non-negative integers identifying the sub-stream.

    Returns:
        A fresh numpy Generator.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *(int(k) for k in keys)]))
