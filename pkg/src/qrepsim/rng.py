"""Deterministic random-generator fan-out.

A single master seed must reproduce a whole experiment byte for byte, no
matter how many trials or sweep points it contains.  Every consumer derives
its own generator from (seed, *path) instead of sharing one stream, so the
result does not depend on evaluation order.
"""
from __future__ import annotations

import numpy as np


def spawn_rng(seed: int, *path: int) -> np.random.Generator:
    """Return a Generator keyed by a master seed plus an integer path.

    spawn_rng(7), spawn_rng(7, 2, 15), ... are independent streams; the same
    arguments always return the same stream.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(ss)
