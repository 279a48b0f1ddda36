"""Seeded random number generation.

All randomized code in this package draws from Philox, a counter-based
64-bit generator whose stream is fixed by the algorithm, so seeded runs
reproduce bit-identically across platforms and numpy builds.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for `seed`; extra integers select independent substreams."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))
