"""Seeded random streams.

Every draw goes through a Generator built from a SeedSequence with an
explicit spawn key. Layers, sweep points and Monte Carlo chunks each get
their own key, so results never depend on execution order.
"""

import numpy as np

from .exceptions import ConfigurationError

# First spawn-key component per consumer
AIRSPACE_STREAM = 0
A2G_STREAM = 1
A2A_STREAM = 2
QMC_STREAM = 3


def substream(seed: int, *key: int) -> np.random.Generator:
    """
    Build an independent generator for one consumer of a run seed.

    Args:
        seed: Run seed (non-negative integer)
        *key: Spawn key identifying the consumer

    Returns:
        numpy Generator seeded from SeedSequence(seed, spawn_key=key)
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ConfigurationError(f"seed must be a non-negative integer, got {seed!r}", key='seed')
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))
