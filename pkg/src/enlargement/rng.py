"""Counter-based randomness.

Every random quantity in the package is a pure function of a 64-bit seed and
an integer key, so results never depend on query order, chunking or worker
count.  Percolation uniforms and walk steps are drawn from separate streams.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# stream tags
PERCOLATION = 1
WALK = 2
SUBGRAPH = 3
AUX = 4

_U_GOLDEN = np.uint64(_GOLDEN)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *parts: int) -> int:
    """Deterministically combine a master seed with integer parts."""
    h = mix64(int(master) + _GOLDEN)
    for part in parts:
        h = mix64(h ^ mix64((int(part) + _GOLDEN) & MASK64))
    return h


def derive_seeds(master: int, stream: int, count: int, offset: int = 0) -> np.ndarray:
    """Per-trial seeds ``derive_seed(master, stream, offset + i)`` for i < count."""
    return np.array(
        [derive_seed(master, stream, offset + i) for i in range(count)], dtype=np.uint64
    )


@njit(cache=True, inline="always")
def nb_mix64(z):
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def nb_uniform(seed, key):
    """Uniform in [0, 1) from a seed and an integer key (both uint64)."""
    h = nb_mix64(nb_mix64(seed + _U_GOLDEN) ^ nb_mix64(key + _U_GOLDEN))
    return (h >> _S11) * _INV53


@njit(cache=True)
def _uniforms(seed, keys):
    out = np.empty(keys.shape[0], dtype=np.float64)
    for i in range(keys.shape[0]):
        out[i] = nb_uniform(seed, keys[i])
    return out


def uniforms(seed: int, keys: np.ndarray) -> np.ndarray:
    """Vectorised ``nb_uniform`` over an array of keys."""
    return _uniforms(np.uint64(seed & MASK64), np.ascontiguousarray(keys, dtype=np.uint64))


def uniform(seed: int, key: int) -> float:
    return float(uniforms(seed, np.array([key], dtype=np.uint64))[0])


@njit(cache=True)
def _mix_array(z):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        out[i] = nb_mix64(z[i])
    return out
