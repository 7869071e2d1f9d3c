"""The infinite lattice Z^d without a window.

Points are integer codes (see ``_codes``), so nothing has to be allocated
up front.  Percolation uses the same global edge keys as ``build_zd_box``, so a
lazy exploration and an explicit box agree edge by edge.

Neighbour ``k`` of x is x - e_k for k < d and x + e_(2d-1-k) otherwise, which
is the sorted-id order of an explicit box; walks started inside a box follow
the same path on both representations until they hit the box boundary.
"""

from __future__ import annotations

import heapq

import numpy as np
from numba import njit

from . import _codes
from ._codes import nb_linf
from .graph import Graph
from .rng import nb_uniform


@njit(cache=True)
def _move(code, k, d, b):
    """(neighbour code, edge key) for direction k."""
    if k < d:
        nxt = code - (np.int64(1) << (b * k))
        return nxt, np.uint64((nxt << 3) | k)
    axis = 2 * d - 1 - k
    nxt = code + (np.int64(1) << (b * axis))
    return nxt, np.uint64((code << 3) | axis)


@njit(cache=True)
def _in_range(code, d, b, limit):
    return nb_linf(code, d, b) <= limit


@njit(cache=True)
def walk_codes(d, b, limit, start, steps, seed, stop_radius):
    """Walk of at most ``steps`` steps; stops on reaching l_inf >= stop_radius
    when stop_radius > 0.  Returns (codes, edge keys, hit_boundary)."""
    path = np.empty(steps + 1, dtype=np.int64)
    keys = np.empty(steps, dtype=np.uint64)
    path[0] = start
    code = start
    n = 0
    hit = False
    if stop_radius > 0 and nb_linf(code, d, b) >= stop_radius:
        return path[:1], keys[:0], True
    for t in range(1, steps + 1):
        k = int(nb_uniform(seed, np.uint64(t)) * (2 * d))
        code, key = _move(code, k, d, b)
        if not _in_range(code, d, b, limit):
            raise OverflowError("walk left the encodable range")
        path[t] = code
        keys[t - 1] = key
        n = t
        if stop_radius > 0 and nb_linf(code, d, b) >= stop_radius:
            hit = True
            break
    return path[: n + 1], keys[:n], hit


@njit(cache=True)
def _member(sorted_codes, x):
    j = np.searchsorted(sorted_codes, x)
    return j < sorted_codes.shape[0] and sorted_codes[j] == x


@njit(cache=True)
def visits_at(d, b, limit, start, checkpoints, seeds, members):
    """Cumulative visits (time 0 included) to the sorted code set ``members``
    at each checkpoint time, one row per walk seed."""
    nw = seeds.shape[0]
    nc = checkpoints.shape[0]
    out = np.zeros((nw, nc), dtype=np.int64)
    horizon = checkpoints[nc - 1]
    for w in range(nw):
        seed = seeds[w]
        code = start
        count = 1 if _member(members, code) else 0
        c = 0
        while c < nc and checkpoints[c] == 0:
            out[w, c] = count
            c += 1
        for t in range(1, horizon + 1):
            k = int(nb_uniform(seed, np.uint64(t)) * (2 * d))
            code, key = _move(code, k, d, b)
            if not _in_range(code, d, b, limit):
                raise OverflowError("walk left the encodable range")
            if _member(members, code):
                count += 1
            while c < nc and checkpoints[c] == t:
                out[w, c] = count
                c += 1
    return out


@njit(cache=True)
def enlarge_codes(d, b, limit, h_codes, h_keys, seed, p, radius):
    """Open clusters of the points ``h_codes`` under the lazy configuration.

    ``h_keys`` (sorted) are forced open.  Points with l_inf > radius are never
    entered when radius >= 0.  Returns (sorted codes, keys of the open or
    forced edges among them)."""
    seen = set()
    stack = []
    for c in h_codes:
        if c not in seen:
            seen.add(c)
            stack.append(c)
    keys = []
    while len(stack) > 0:
        v = stack.pop()
        for k in range(2 * d):
            w, key = _move(v, k, d, b)
            if radius >= 0 and nb_linf(w, d, b) > radius:
                continue
            if not (nb_uniform(seed, key) < p or _member(h_keys, key)):
                continue
            if not _in_range(w, d, b, limit):
                raise OverflowError("cluster left the encodable range")
            if v < w:
                keys.append(key)
            if w not in seen:
                seen.add(w)
                stack.append(w)
    codes = np.empty(len(seen), dtype=np.int64)
    i = 0
    for c in seen:
        codes[i] = c
        i += 1
    codes.sort()
    out_keys = np.empty(len(keys), dtype=np.uint64)
    for i in range(len(keys)):
        out_keys[i] = keys[i]
    # H edges whose endpoints were never expanded past are still H edges
    out_keys = np.unique(np.concatenate((out_keys, h_keys)))
    return codes, out_keys


@njit(cache=True)
def invasion_radii(d, b, start, radii, seeds):
    """Per seed and radius L: smallest p at which ``start`` is joined by open
    edges to the sphere l_inf = L (exact, through invasion from ``start``)."""
    out = np.empty((seeds.shape[0], radii.shape[0]), dtype=np.float64)
    rmax = radii[radii.shape[0] - 1]
    for t in range(seeds.shape[0]):
        seed = seeds[t]
        seen = set()
        heap = [(-1.0, start)]
        running = -1.0
        nxt = 0
        while len(heap) > 0 and nxt < radii.shape[0]:
            w, v = heapq.heappop(heap)
            if v in seen:
                continue
            seen.add(v)
            if w > running:
                running = w
            r = nb_linf(v, d, b)
            while nxt < radii.shape[0] and radii[nxt] <= r:
                out[t, nxt] = running
                nxt += 1
            if r >= rmax:
                break
            for k in range(2 * d):
                x, key = _move(v, k, d, b)
                if x not in seen:
                    heapq.heappush(heap, (nb_uniform(seed, key), x))
    return out


class ZdLattice:
    """Handle on Z^d carrying the code layout."""

    def __init__(self, d: int):
        self.d = int(d)
        self.b = _codes.bits_per_axis(self.d)
        self.limit = _codes.coord_limit(self.d)
        self.origin = int(_codes.encode(np.zeros(self.d, dtype=np.int64))[0])

    def encode(self, coords) -> np.ndarray:
        return _codes.encode(coords)

    def decode(self, codes) -> np.ndarray:
        return _codes.decode(codes, self.d)

    def linf(self, codes) -> np.ndarray:
        return np.abs(self.decode(codes)).max(axis=1)

    def walk(self, steps: int, seed: int, start: int | None = None, stop_radius: int = 0):
        s = self.origin if start is None else int(start)
        return walk_codes(self.d, self.b, self.limit, np.int64(s), int(steps),
                          np.uint64(seed), int(stop_radius))

    def visits(self, checkpoints, seeds, members, start: int | None = None) -> np.ndarray:
        s = self.origin if start is None else int(start)
        return visits_at(self.d, self.b, self.limit, np.int64(s),
                         np.asarray(checkpoints, dtype=np.int64),
                         np.asarray(seeds, dtype=np.uint64),
                         np.unique(np.asarray(members, dtype=np.int64)))

    def enlarge(self, h_codes, h_keys, seed: int, p: float, radius: int = -1):
        return enlarge_codes(self.d, self.b, self.limit,
                             np.unique(np.asarray(h_codes, dtype=np.int64)),
                             np.unique(np.asarray(h_keys, dtype=np.uint64)),
                             np.uint64(seed), float(p), int(radius))

    def crossing_thresholds(self, radii, seeds) -> np.ndarray:
        radii = np.asarray(sorted(int(r) for r in radii), dtype=np.int64)
        if radii.size == 0 or radii[0] < 1:
            raise ValueError("radii must be positive")
        if radii[-1] >= self.limit:
            raise OverflowError("radius beyond the encodable range")
        return invasion_radii(self.d, self.b, np.int64(self.origin), radii,
                              np.asarray(seeds, dtype=np.uint64))

    def edge_endpoints(self, keys) -> tuple[np.ndarray, np.ndarray]:
        keys = np.asarray(keys, dtype=np.uint64)
        lower = (keys >> np.uint64(3)).astype(np.int64)
        axis = (keys & np.uint64(7)).astype(np.int64)
        return lower, lower + (np.int64(1) << (self.b * axis))

    def box_ids(self, codes, radius: int) -> np.ndarray:
        """Vertex ids in ``build_zd_box(d, radius)``; -1 outside the box."""
        x = self.decode(codes)
        inside = np.abs(x).max(axis=1) <= radius
        out = np.full(x.shape[0], -1, dtype=np.int64)
        side = 2 * radius + 1
        out[inside] = np.ravel_multi_index(tuple((x[inside] + radius).T), (side,) * self.d)
        return out

    def to_graph(self, codes, keys, boundary_radius: int | None = None,
                 family: str = "zd_patch") -> Graph:
        """Explicit graph on the given points and edge keys.

        Boundary: points with l_inf >= boundary_radius (none if omitted)."""
        codes = np.unique(np.asarray(codes, dtype=np.int64))
        keys = np.unique(np.asarray(keys, dtype=np.uint64))
        lo, hi = self.edge_endpoints(keys)
        u = np.searchsorted(codes, lo)
        v = np.searchsorted(codes, hi)
        ok = (u < codes.size) & (v < codes.size)
        ok[ok] &= (codes[u[ok]] == lo[ok]) & (codes[v[ok]] == hi[ok])
        if not ok.all():
            raise ValueError("edge key with an endpoint outside the point set")
        coords = self.decode(codes)
        if boundary_radius is None:
            boundary = np.zeros(codes.size, dtype=bool)
        else:
            boundary = np.abs(coords).max(axis=1) >= boundary_radius
        return Graph.from_edges(codes.size, np.stack([u, v], axis=1), coords, boundary, family,
                                {"d": self.d}, keys, 2 * self.d)
