"""Integer codes for points of Z^d and for lattice edges.

A point x is packed as sum_i (x_i + OFFSET) << (BITS * i).  The edge between
x and x + e_i is keyed by (code(x) << 3) | i, so every nearest-neighbour edge
of the infinite lattice has a window-independent key.  Explicit boxes and the
lazy lattice therefore see the same percolation configuration.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MAX_LATTICE_DIM = 6


def bits_per_axis(d: int) -> int:
    if not 1 <= d <= MAX_LATTICE_DIM:
        raise ValueError(f"lattice codes support 1 <= d <= {MAX_LATTICE_DIM}, got {d}")
    return min(20, 60 // d)


def coord_limit(d: int) -> int:
    """Largest |x_i| representable in a code."""
    return (1 << (bits_per_axis(d) - 1)) - 1


def encode(coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.int64)
    if coords.ndim == 1:
        coords = coords[None, :]
    d = coords.shape[1]
    b = bits_per_axis(d)
    off = 1 << (b - 1)
    if np.any(np.abs(coords) >= off):
        raise OverflowError("coordinate outside the encodable range")
    codes = np.zeros(coords.shape[0], dtype=np.int64)
    for i in range(d):
        codes |= (coords[:, i] + off) << (b * i)
    return codes


def decode(codes: np.ndarray, d: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    b = bits_per_axis(d)
    off = 1 << (b - 1)
    mask = (1 << b) - 1
    out = np.empty((codes.shape[0], d), dtype=np.int64)
    for i in range(d):
        out[:, i] = ((codes >> (b * i)) & mask) - off
    return out


def edge_keys(lower_codes: np.ndarray, axes: np.ndarray) -> np.ndarray:
    lower = np.asarray(lower_codes, dtype=np.int64)
    return ((lower << 3) | np.asarray(axes, dtype=np.int64)).astype(np.uint64)


@njit(cache=True, inline="always")
def nb_coord(code, axis, b):
    off = np.int64(1) << (b - 1)
    mask = (np.int64(1) << b) - 1
    return ((code >> (b * axis)) & mask) - off


@njit(cache=True, inline="always")
def nb_edge_key(lower, axis):
    return np.uint64((lower << 3) | axis)


@njit(cache=True)
def nb_linf(code, d, b):
    m = 0
    for i in range(d):
        c = abs(nb_coord(code, i, b))
        if c > m:
            m = c
    return m


@njit(cache=True)
def nb_l1(code, d, b):
    s = 0
    for i in range(d):
        s += abs(nb_coord(code, i, b))
    return s
