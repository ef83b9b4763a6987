"""Deterministic, splittable random number generation.

Two layers:

* ``mix64`` / ``derive_key`` -- the SplitMix64 finalizer (Steele, Lea &
  Flood's constants) used as a keyed 64-bit hash.  Hashing is how every
  derived seed in this package is produced: per-trial seeds are
  ``derive_key(seed, size, trial)``, per-point dilution keys are
  ``derive_key(seed, x, y)``.  Because each draw depends only on its key
  and not on call order, dilution and parallel trials are reproducible
  and order-independent.

* ``stream`` -- a numpy Philox bit generator keyed by a derived key, for
  bulk sampling (walk steps, binomials).  Philox is counter based, so a
  stream is a pure function of its key.

Both layers are fixed for the life of the package; changing either
breaks golden outputs.
"""

from __future__ import annotations

import numpy as np

# SplitMix64 constants.
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

_U64 = np.uint64
_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


def mix64(x):
    """SplitMix64 finalizer; accepts a python int or a uint64 ndarray."""
    old = np.seterr(over="ignore")
    try:
        z = np.asarray(x, dtype=np.uint64)
        z = (z + _GAMMA) & _MASK
        z = ((z ^ (z >> np.uint64(30))) * _MIX1) & _MASK
        z = ((z ^ (z >> np.uint64(27))) * _MIX2) & _MASK
        z = z ^ (z >> np.uint64(31))
        return z if z.ndim else int(z)
    finally:
        np.seterr(**old)


def derive_key(*words) -> int:
    """Fold integer words into one 64-bit key, order sensitive."""
    acc = 0
    for w in words:
        acc = mix64((acc + (int(w) & 0xFFFFFFFFFFFFFFFF)) & 0xFFFFFFFFFFFFFFFF)
    return int(acc)


def point_uniforms(seed: int, xs, ys):
    """One uniform in [0, 1) per lattice point, keyed by (seed, x, y).

    Vectorised and order independent: the draw for a point is the same
    whatever other points are in the arrays.
    """
    old = np.seterr(over="ignore")
    try:
        xs = np.asarray(xs, dtype=np.int64).astype(np.uint64)
        ys = np.asarray(ys, dtype=np.int64).astype(np.uint64)
        h = mix64((np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + mix64(xs)) & _MASK)
        h = mix64((h + ys) & _MASK)
        return np.asarray(h, dtype=np.uint64).astype(np.float64) / 2.0**64
    finally:
        np.seterr(**old)


def stream(key: int) -> np.random.Generator:
    """Bulk generator for the given derived key (Philox, counter based)."""
    return np.random.Generator(np.random.Philox(key=key & 0xFFFFFFFFFFFFFFFF))
