"""Seeded random streams.

Every consumer derives its generator from ``(seed, *key)`` through numpy's
``SeedSequence`` spawn keys, feeding PCG64. Trial ``i`` of a search seeded with
``s`` always sees ``stream(s, i)``, regardless of how trials are scheduled.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
