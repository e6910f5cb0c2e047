"""Deterministic random streams for reproducible benchmarks.

All randomness in this package flows through :func:`rng`, which wraps
numpy's PCG64 (a permuted-congruential generator).  Streams are
reproducible across platforms for a fixed numpy major line, and uniform
doubles are produced by the usual 53-bit mantissa construction
(``(x >> 11) * 2**-53`` on the raw 64-bit output).

Sub-streams for independent work units (e.g. grid cells of a parameter
sweep) are derived with :func:`derive_seed`, a splitmix64-style integer
hash of the master seed and the unit's indices, so results do not depend
on scheduling order.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, *indices: int) -> int:
    """Mix a master seed with integer indices into a 64-bit sub-seed."""
    x = _splitmix64(seed & _MASK64)
    for idx in indices:
        x = _splitmix64(x ^ (idx & _MASK64))
    return x


def rng(seed: int) -> np.random.Generator:
    """Deterministic 64-bit generator for the given seed."""
    return np.random.Generator(np.random.PCG64(seed & _MASK64))
