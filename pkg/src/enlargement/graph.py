"""Finite graph windows, subgraphs and the graph families used in the experiments.

An infinite graph is represented by a finite window whose ``boundary`` marks
the vertices that lost neighbours to the truncation.  Everything "infinite"
elsewhere in the package means "reaches the boundary of the window".
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from . import _codes
from ._kernels import bfs_dist
from .rng import nb_mix64, nb_uniform

DEFAULT_BUDGET = 30_000_000
FORMAT_VERSION = 1


class ResourceError(RuntimeError):
    """Requested window exceeds the memory budget."""


class GraphError(ValueError):
    pass


def _check_budget(count: int, budget: int, what: str) -> None:
    if count > budget:
        raise ResourceError(f"{what}: {count} exceeds budget {budget}")


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple graph window.

    ``edges`` rows are (u, v) with u < v in lexicographic order; the row index
    is the EdgeId.  ``labels`` is an (n, k) integer array (coordinates, or
    (side, depth, index) style tags).  ``edge_keys`` feed the percolation hash.
    """

    n: int
    edges: np.ndarray
    labels: np.ndarray
    boundary: np.ndarray
    family: str = "custom"
    params: dict = field(default_factory=dict)
    edge_keys: np.ndarray | None = None
    degree_bound: int | None = None

    def __post_init__(self):
        edges = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        labels = np.array(self.labels, dtype=np.int64)
        if labels.ndim == 1:
            labels = labels[:, None]
        boundary = np.zeros(self.n, dtype=bool)
        b = np.asarray(self.boundary)
        if b.dtype == bool:
            boundary[:] = b
        else:
            boundary[b.astype(np.int64)] = True
        keys = (np.arange(edges.shape[0], dtype=np.uint64) if self.edge_keys is None
                else np.array(self.edge_keys, dtype=np.uint64))
        for name, val in (("edges", edges), ("labels", labels), ("boundary", boundary),
                          ("edge_keys", keys)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        self._check()

    def _check(self) -> None:
        e = self.edges
        if self.labels.shape[0] != self.n:
            raise GraphError("one label row per vertex required")
        if self.edge_keys.shape[0] != e.shape[0]:
            raise GraphError("one key per edge required")
        if e.size:
            if e.min() < 0 or e.max() >= self.n:
                raise GraphError("edge endpoint is not a vertex")
            if np.any(e[:, 0] >= e[:, 1]):
                raise GraphError("edges must be stored as (u, v) with u < v; no self-loops")
            order = np.lexsort((e[:, 1], e[:, 0]))
            if np.any(order != np.arange(e.shape[0])):
                raise GraphError("edges must be sorted lexicographically")
            same = (e[1:, 0] == e[:-1, 0]) & (e[1:, 1] == e[:-1, 1])
            if np.any(same):
                raise GraphError("duplicate edge")

    @classmethod
    def from_edges(cls, n: int, edges, labels=None, boundary=(), family: str = "custom",
                   params: dict | None = None, edge_keys=None, degree_bound: int | None = None):
        """Canonicalise an arbitrary edge list (orientation and order)."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if np.any(e[:, 0] == e[:, 1]):
            raise GraphError("self-loop")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        order = np.lexsort((hi, lo))
        e = np.stack([lo[order], hi[order]], axis=1)
        keys = None if edge_keys is None else np.asarray(edge_keys, dtype=np.uint64)[order]
        if labels is None:
            labels = np.arange(n, dtype=np.int64)[:, None]
        return cls(n, e, labels, np.asarray(boundary) if len(boundary) else np.zeros(n, bool),
                   family, dict(params or {}), keys, degree_bound)

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def _csr(self):
        n, e = self.n, self.edges
        m = e.shape[0]
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return indptr, dst[order].copy(), eid[order].copy()

    @property
    def indptr(self) -> np.ndarray:
        return self._csr[0]

    @property
    def nbr(self) -> np.ndarray:
        return self._csr[1]

    @property
    def nbr_edge(self) -> np.ndarray:
        return self._csr[2]

    @cached_property
    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbr[self.indptr[v]:self.indptr[v + 1]]

    def edge_id(self, u: int, v: int) -> int:
        """EdgeId of {u, v}; KeyError if absent."""
        lo, hi = self.indptr[u], self.indptr[u + 1]
        j = lo + np.searchsorted(self.nbr[lo:hi], v)
        if j < hi and self.nbr[j] == v:
            return int(self.nbr_edge[j])
        raise KeyError((u, v))

    def check_vertex(self, v) -> int:
        v = int(v)
        if not 0 <= v < self.n:
            raise GraphError(f"unknown vertex {v}")
        return v

    def vertex_of(self, label: Sequence[int]) -> int:
        """Vertex id with the given label row."""
        hits = np.flatnonzero(np.all(self.labels == np.asarray(label, dtype=np.int64), axis=1))
        if hits.size != 1:
            raise GraphError(f"no unique vertex labelled {tuple(label)}")
        return int(hits[0])

    def validate(self) -> None:
        """Re-check the structural invariants plus the declared degree bound."""
        self._check()
        if self.degree_bound is not None and self.n and self.degree.max() > self.degree_bound:
            raise GraphError("degree bound violated")

    def __repr__(self) -> str:
        return f"Graph({self.family}, n={self.n}, m={self.m}, boundary={int(self.boundary.sum())})"


@dataclass(frozen=True, eq=False)
class Subgraph:
    """Vertex and edge masks over a parent graph."""

    parent: Graph
    vertex_mask: np.ndarray
    edge_mask: np.ndarray

    def __post_init__(self):
        vm = np.array(self.vertex_mask, dtype=bool)
        em = np.array(self.edge_mask, dtype=bool)
        if vm.shape != (self.parent.n,) or em.shape != (self.parent.m,):
            raise GraphError("mask shapes do not match the parent graph")
        e = self.parent.edges[em]
        if e.size and not (vm[e[:, 0]].all() and vm[e[:, 1]].all()):
            raise GraphError("subgraph edge with an endpoint outside the vertex set")
        vm.setflags(write=False)
        em.setflags(write=False)
        object.__setattr__(self, "vertex_mask", vm)
        object.__setattr__(self, "edge_mask", em)

    @classmethod
    def from_ids(cls, parent: Graph, vertices: Iterable[int] = (), edges: Iterable[int] = (),
                 add_endpoints: bool = False) -> "Subgraph":
        vm = np.zeros(parent.n, dtype=bool)
        em = np.zeros(parent.m, dtype=bool)
        vm[np.fromiter(vertices, dtype=np.int64)] = True
        em[np.fromiter(edges, dtype=np.int64)] = True
        if add_endpoints:
            vm[parent.edges[em].ravel()] = True
        return cls(parent, vm, em)

    @classmethod
    def full(cls, parent: Graph) -> "Subgraph":
        return cls(parent, np.ones(parent.n, bool), np.ones(parent.m, bool))

    @classmethod
    def induced(cls, parent: Graph, vertices) -> "Subgraph":
        vm = np.zeros(parent.n, dtype=bool)
        vm[np.asarray(list(vertices) if not isinstance(vertices, np.ndarray) else vertices,
                      dtype=np.int64)] = True
        e = parent.edges
        return cls(parent, vm, vm[e[:, 0]] & vm[e[:, 1]])

    @property
    def vertices(self) -> np.ndarray:
        return np.flatnonzero(self.vertex_mask)

    @property
    def edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_mask)

    @property
    def n_vertices(self) -> int:
        return int(self.vertex_mask.sum())

    @property
    def n_edges(self) -> int:
        return int(self.edge_mask.sum())

    def issubset(self, other: "Subgraph") -> bool:
        self._same_parent(other)
        return bool(np.all(other.vertex_mask[self.vertex_mask])
                    and np.all(other.edge_mask[self.edge_mask]))

    def union(self, other: "Subgraph") -> "Subgraph":
        self._same_parent(other)
        return Subgraph(self.parent, self.vertex_mask | other.vertex_mask,
                        self.edge_mask | other.edge_mask)

    def _same_parent(self, other: "Subgraph") -> None:
        if other.parent is not self.parent:
            raise GraphError("subgraphs of different graphs")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subgraph) or other.parent is not self.parent:
            return NotImplemented
        return bool(np.array_equal(self.vertex_mask, other.vertex_mask)
                    and np.array_equal(self.edge_mask, other.edge_mask))

    __hash__ = None

    def __repr__(self) -> str:
        return f"Subgraph(|V|={self.n_vertices}, |E|={self.n_edges} of {self.parent!r})"


@dataclass(frozen=True, eq=False)
class Bipartition:
    """V(G) = A ∪ B, disjoint; stored as a mask of side A."""

    in_a: np.ndarray

    def __post_init__(self):
        a = np.array(self.in_a, dtype=bool)
        a.setflags(write=False)
        object.__setattr__(self, "in_a", a)

    @classmethod
    def from_sets(cls, g: Graph, side_a: Iterable[int], side_b: Iterable[int] | None = None):
        a = set(int(x) for x in side_a)
        b = set(range(g.n)) - a if side_b is None else set(int(x) for x in side_b)
        if a & b:
            raise GraphError("sides of a bipartition must be disjoint")
        if a | b != set(range(g.n)):
            raise GraphError("sides of a bipartition must cover V(G)")
        mask = np.zeros(g.n, dtype=bool)
        mask[list(a)] = True
        return cls(mask)

    @property
    def side_a(self) -> np.ndarray:
        return np.flatnonzero(self.in_a)

    @property
    def side_b(self) -> np.ndarray:
        return np.flatnonzero(~self.in_a)

    def swapped(self) -> "Bipartition":
        return Bipartition(~self.in_a)


# ---------------------------------------------------------------- generators


def build_zd_box(d: int, radius: int, budget: int = DEFAULT_BUDGET) -> Graph:
    """Nearest-neighbour box {|x|_inf <= radius} of Z^d; boundary |x|_inf = radius."""
    if d < 1 or radius < 1:
        raise GraphError("need d >= 1 and radius >= 1")
    side = 2 * radius + 1
    _check_budget(d * side**d, budget, "Z^d box")
    n = side**d
    coords = np.stack(np.unravel_index(np.arange(n), (side,) * d), axis=1).astype(np.int64) - radius
    strides = [side ** (d - 1 - i) for i in range(d)]
    us, vs, axes = [], [], []
    for i in range(d):
        lower = np.flatnonzero(coords[:, i] < radius)
        us.append(lower)
        vs.append(lower + strides[i])
        axes.append(np.full(lower.size, i))
    u = np.concatenate(us)
    v = np.concatenate(vs)
    ax = np.concatenate(axes)
    order = np.lexsort((v, u))
    u, v, ax = u[order], v[order], ax[order]
    keys = None
    if d <= _codes.MAX_LATTICE_DIM:
        keys = _codes.edge_keys(_codes.encode(coords[u]), ax)
    boundary = np.abs(coords).max(axis=1) == radius
    return Graph(n, np.stack([u, v], axis=1), coords, boundary, "zd_box",
                 {"d": d, "radius": radius}, keys, 2 * d)


_TREE_ROOT_HASH = 0x243F6A8885A308D3


@njit(cache=True)
def _child_hashes(parent_hashes, nchild):
    out = np.empty(parent_hashes.shape[0] * nchild, dtype=np.uint64)
    k = 0
    for i in range(parent_hashes.shape[0]):
        for c in range(nchild):
            out[k] = nb_mix64(parent_hashes[i] ^ nb_mix64(np.uint64(c + 1)))
            k += 1
    return out


def tree_root_hash() -> np.uint64:
    return np.uint64(_TREE_ROOT_HASH)


def _spherical_tree(branching: Sequence[int], root_hash: np.uint64 | None = None):
    """Levels of a spherically symmetric tree: (parent ids, level sizes, child hashes).

    Vertex ids are BFS order with the root 0; ``branching[l]`` children per
    level-l vertex.
    """
    sizes = [1]
    parents = []
    hashes = []
    level_hash = np.array([root_hash if root_hash is not None else _TREE_ROOT_HASH],
                          dtype=np.uint64)
    start = 0
    for b in branching:
        cur = sizes[-1]
        parents.append(np.repeat(np.arange(start, start + cur), b))
        level_hash = _child_hashes(level_hash, b)
        hashes.append(level_hash)
        start += cur
        sizes.append(cur * b)
    return parents, sizes, hashes


def regular_tree_size(d: int, depth: int) -> int:
    if depth == 0:
        return 1
    if d == 2:
        return 1 + 2 * depth
    return 1 + d * ((d - 1) ** depth - 1) // (d - 2)


def build_regular_tree(d: int, depth: int, budget: int = DEFAULT_BUDGET) -> Graph:
    """Ball of radius ``depth`` around the root of the d-regular tree."""
    if d < 2:
        raise GraphError("regular tree needs degree d >= 2")
    if depth < 0:
        raise GraphError("depth must be >= 0")
    _check_budget(regular_tree_size(d, depth), budget, "regular tree")
    branching = [d] + [d - 1] * (depth - 1) if depth else []
    parents, sizes, hashes = _spherical_tree(branching)
    n = sum(sizes)
    labels = np.concatenate([np.stack([np.full(s, k), np.arange(s)], axis=1)
                             for k, s in enumerate(sizes)]) if n else np.zeros((0, 2))
    if parents:
        par = np.concatenate(parents)
        edges = np.stack([par, np.arange(1, n)], axis=1)
        keys = np.concatenate(hashes)
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
        keys = np.zeros(0, dtype=np.uint64)
    boundary = labels[:, 0] == depth
    return Graph(n, edges, labels, boundary, "regular_tree", {"d": d, "depth": depth}, keys, d)


@dataclass(frozen=True)
class LazyRegularTree:
    """Rooted ball of T_d whose vertices are generated on demand.

    Edge keys coincide with :func:`build_regular_tree`, so an explicit tree
    and a lazy tree of any depth see the same configuration.
    """

    d: int
    depth: int

    def __post_init__(self):
        if self.d < 3:
            raise GraphError("lazy tree needs d >= 3")
        if self.depth < 1:
            raise GraphError("lazy tree needs depth >= 1")

    family = "lazy_tree"

    @property
    def params(self) -> dict:
        return {"d": self.d, "depth": self.depth}

    def crossing_thresholds(self, depths, seeds) -> np.ndarray:
        """Per seed and depth k: the smallest p at which the root is joined by
        open edges to some vertex at depth k."""
        depths = np.asarray(sorted(int(k) for k in depths), dtype=np.int64)
        if depths.size == 0 or depths[0] < 1 or depths[-1] > self.depth:
            raise GraphError("depths must lie in 1..depth")
        return _tree_invasion(self.d, depths, np.asarray(seeds, dtype=np.uint64),
                              np.uint64(_TREE_ROOT_HASH))


@njit(cache=True)
def _tree_invasion(d, depths, seeds, root_hash):
    out = np.empty((seeds.shape[0], depths.shape[0]), dtype=np.float64)
    kmax = depths[depths.shape[0] - 1]
    for t in range(seeds.shape[0]):
        seed = seeds[t]
        heap = [(-1.0, np.int64(0), root_hash)]
        running = -1.0
        nxt = 0
        while nxt < depths.shape[0]:
            w, k, h = heapq.heappop(heap)
            if w > running:
                running = w
            while nxt < depths.shape[0] and depths[nxt] <= k:
                out[t, nxt] = running
                nxt += 1
            if k >= kmax:
                break
            nchild = d if k == 0 else d - 1
            for c in range(nchild):
                ch = nb_mix64(h ^ nb_mix64(np.uint64(c + 1)))
                heapq.heappush(heap, (nb_uniform(seed, ch), k + 1, ch))
    return out


def build_line_graph(levels: int, budget: int = DEFAULT_BUDGET) -> Graph:
    """Simple version of the multi-edge line graph: backbone 0..levels,
    one two-edge connection between 0 and 1 and 2k^3 between k and k+1.

    Labels: backbone k -> (0, k, 0); j-th midpoint between k and k+1 -> (1, k, j).
    """
    if levels < 1:
        raise GraphError("levels must be >= 1")
    counts = np.array([1] + [2 * k**3 for k in range(1, levels)], dtype=np.int64)
    n_mid = int(counts.sum())
    _check_budget(2 * n_mid, budget, "line graph")
    nb = levels + 1
    level_of = np.repeat(np.arange(levels), counts)
    j_of = np.arange(n_mid) - np.repeat(np.cumsum(counts) - counts, counts)
    mids = nb + np.arange(n_mid)
    u = np.concatenate([level_of, level_of + 1])
    v = np.concatenate([mids, mids])
    order = np.lexsort((v, u))
    edges = np.stack([u[order], v[order]], axis=1)
    labels = np.concatenate([
        np.stack([np.zeros(nb), np.arange(nb), np.zeros(nb)], axis=1),
        np.stack([np.ones(n_mid), level_of, j_of], axis=1),
    ]).astype(np.int64)
    boundary = np.zeros(nb + n_mid, dtype=bool)
    boundary[levels] = True
    boundary[nb:][level_of == levels - 1] = True
    return Graph(nb + n_mid, edges, labels, boundary, "line_graph", {"levels": levels},
                 None, None)


def line_graph_backbone(g: Graph) -> Subgraph:
    """Backbone path 0 - m - 1 - m' - ... using the first connection of each level."""
    if g.family != "line_graph":
        raise GraphError("not a line graph")
    levels = g.params["levels"]
    firsts = np.flatnonzero((g.labels[:, 0] == 1) & (g.labels[:, 2] == 0))
    verts = np.concatenate([np.arange(levels + 1), firsts])
    eids = []
    for mid in firsts:
        k = int(g.labels[mid, 1])
        eids.append(g.edge_id(k, mid))
        eids.append(g.edge_id(k + 1, mid))
    return Subgraph.from_ids(g, verts, eids)


def branching_at_levels(levels: Iterable[int], depth: int, factor: int = 2) -> tuple:
    """Branching sequence with ``factor`` children at the given levels, 1 elsewhere."""
    lv = set(int(x) for x in levels)
    return tuple(factor if ell in lv else 1 for ell in range(depth))


def transient_tree_schedule(depth: int, exponent: float = 2.0) -> tuple:
    """Branching sequence with level sizes 2^floor(exponent * log2(n + 1)).

    Level sizes grow like n^exponent: transient for exponent > 1 while the
    branching number stays 1, so percolation never survives for p < 1.
    """
    f = [int(math.floor(exponent * math.log2(n + 1) + 1e-12)) for n in range(depth + 1)]
    return tuple(2 ** (f[k + 1] - f[k]) for k in range(depth))


def build_hybrid_z2_tree(z2_radius: int, tree_spec: Sequence[int] | None = None,
                         tree_depth: int = 64, budget: int = DEFAULT_BUDGET) -> Graph:
    """Z^2 box with a spherically symmetric tree glued at the origin.

    ``tree_spec`` is the branching sequence (children per vertex, level by
    level, root = origin).  Labels: (0, x, y) on the lattice side and
    (1, depth, index) on the tree side.
    """
    if tree_spec is None:
        tree_spec = transient_tree_schedule(tree_depth)
    tree_spec = tuple(int(b) for b in tree_spec)
    if any(b < 1 for b in tree_spec):
        raise GraphError("branching sequence entries must be >= 1")
    box = build_zd_box(2, z2_radius, budget)
    parents, sizes, _ = _spherical_tree(tree_spec)
    n_tree = sum(sizes) - 1
    _check_budget(box.n + n_tree, budget, "hybrid graph")
    origin = box.vertex_of((0, 0))
    # tree vertex with BFS id t > 0 becomes box.n + t - 1; the root is the origin
    tmap = np.concatenate([[origin], box.n + np.arange(n_tree)])
    t_edges = [np.stack([tmap[par], tmap[np.arange(par.size) + 1 + off]], axis=1)
               for par, off in zip(parents, np.cumsum([0] + [p.size for p in parents[:-1]]))]
    edges = np.concatenate([box.edges] + t_edges) if t_edges else box.edges
    t_labels = [np.stack([np.ones(s), np.full(s, k), np.arange(s)], axis=1)
                for k, s in enumerate(sizes) if k > 0]
    labels = np.concatenate([np.concatenate([np.zeros((box.n, 1)), box.labels], axis=1)]
                            + t_labels).astype(np.int64)
    boundary = np.concatenate([box.boundary, np.zeros(n_tree, bool)])
    if tree_spec:
        boundary[box.n + n_tree - sizes[-1]:] = True
    g = Graph.from_edges(box.n + n_tree, edges, labels, boundary, "hybrid_z2_tree",
                         {"z2_radius": z2_radius, "tree_spec": list(tree_spec)})
    bound = max(4 + (tree_spec[0] if tree_spec else 0), 1 + max(tree_spec, default=0))
    return Graph(g.n, g.edges, g.labels, g.boundary, g.family, g.params, None, bound)


def build_glued_trees(d1: int, d2: int, depth: int, budget: int = DEFAULT_BUDGET) -> Graph:
    """Balls of T_d1 and T_d2 sharing their root (the glue vertex, label (0, 0, 0)).

    Other labels: (1, depth, index) on the T_d1 side, (2, depth, index) on the
    T_d2 side.
    """
    if min(d1, d2) < 2 or depth < 1:
        raise GraphError("need degrees >= 2 and depth >= 1")
    _check_budget(regular_tree_size(d1, depth) + regular_tree_size(d2, depth), budget,
                  "glued trees")
    edges = []
    labels = [np.zeros((1, 3))]
    boundary = []
    offset = 1
    for side, d in ((1, d1), (2, d2)):
        t = build_regular_tree(d, depth)
        idmap = np.concatenate([[0], offset + np.arange(t.n - 1)])
        edges.append(idmap[t.edges])
        labels.append(np.concatenate([np.full((t.n - 1, 1), side), t.labels[1:]], axis=1))
        boundary.append(idmap[np.flatnonzero(t.boundary)])
        offset += t.n - 1
    g = Graph.from_edges(offset, np.concatenate(edges), np.concatenate(labels).astype(np.int64),
                         np.concatenate(boundary), "glued_trees",
                         {"d1": d1, "d2": d2, "depth": depth})
    return Graph(g.n, g.edges, g.labels, g.boundary, g.family, g.params, None, d1 + d2)


def side_of(g: Graph, side: int) -> np.ndarray:
    """Vertices of a glued/hybrid graph on the given side (glue vertex included)."""
    mask = g.labels[:, 0] == side
    if g.family == "glued_trees":
        mask[0] = True
    return np.flatnonzero(mask)


# ---------------------------------------------------------------- metric utilities


def distances(g: Graph, x, cutoff: int = -1, edge_mask: np.ndarray | None = None,
              vertex_mask: np.ndarray | None = None) -> np.ndarray:
    """BFS distances from x (a vertex or an array of vertices); -1 if unreachable."""
    sources = np.atleast_1d(np.asarray(x, dtype=np.int64))
    em = np.ones(g.m, bool) if edge_mask is None else edge_mask
    vm = np.ones(g.n, bool) if vertex_mask is None else vertex_mask
    return bfs_dist(g.indptr, g.nbr, g.nbr_edge, em, vm, sources, int(cutoff))


def ball(g: Graph, x: int, n: int) -> np.ndarray:
    """Sorted vertex ids at graph distance <= n from x."""
    x = g.check_vertex(x)
    if n < 0:
        raise GraphError("radius must be >= 0")
    return np.flatnonzero(distances(g, x, n) >= 0)


def bipartition_cut(g: Graph, part: Bipartition) -> np.ndarray:
    """EdgeIds with one endpoint on each side."""
    if part.in_a.shape != (g.n,):
        raise GraphError("partition does not match the graph")
    a = part.in_a
    return np.flatnonzero(a[g.edges[:, 0]] != a[g.edges[:, 1]])


def is_tree(g: Graph) -> bool:
    if g.m != g.n - 1:
        return False
    return bool(np.all(distances(g, 0) >= 0)) if g.n else True


def subtree_split(t: Graph, e: int, x: int) -> Subgraph:
    """Component of t - e containing the endpoint x of e."""
    if not 0 <= e < t.m:
        raise GraphError(f"unknown edge {e}")
    x = t.check_vertex(x)
    if x not in t.edges[e]:
        raise GraphError("x is not an endpoint of e")
    if not is_tree(t):
        raise GraphError("subtree_split needs a tree")
    em = np.ones(t.m, dtype=bool)
    em[e] = False
    reach = distances(t, x, edge_mask=em) >= 0
    return Subgraph(t, reach, em & reach[t.edges[:, 0]] & reach[t.edges[:, 1]])


# ---------------------------------------------------------------- text format


def dumps(g: Graph) -> str:
    """Line-oriented text form; ``loads(dumps(g))`` reproduces g exactly."""
    lines = [f"enlargement-graph {FORMAT_VERSION}",
             f"family {g.family}",
             "params " + json.dumps(g.params, sort_keys=True),
             f"degree_bound {'-' if g.degree_bound is None else g.degree_bound}",
             f"vertices {g.n} {g.labels.shape[1]}"]
    lines += [f"{i} " + " ".join(map(str, row)) for i, row in enumerate(g.labels.tolist())]
    lines.append(f"edges {g.m}")
    keys = g.edge_keys.tolist()
    lines += [f"{i} {u} {v} {k}" for i, ((u, v), k) in enumerate(zip(g.edges.tolist(), keys))]
    b = np.flatnonzero(g.boundary).tolist()
    lines.append(f"boundary {len(b)}")
    lines.append(" ".join(map(str, b)))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Graph:
    it = iter(text.splitlines())
    head = next(it).split()
    if head[0] != "enlargement-graph" or int(head[1]) != FORMAT_VERSION:
        raise GraphError("not an enlargement-graph v1 document")
    family = next(it).split(" ", 1)[1]
    params = json.loads(next(it).split(" ", 1)[1])
    db = next(it).split()[1]
    _, n, k = next(it).split()
    n, k = int(n), int(k)
    labels = np.zeros((n, k), dtype=np.int64)
    for i in range(n):
        row = next(it).split()
        if int(row[0]) != i:
            raise GraphError("vertex ids must be dense and ordered")
        labels[i] = [int(x) for x in row[1:]]
    m = int(next(it).split()[1])
    edges = np.zeros((m, 2), dtype=np.int64)
    keys = np.zeros(m, dtype=np.uint64)
    for i in range(m):
        row = next(it).split()
        if int(row[0]) != i:
            raise GraphError("edge ids must be dense and ordered")
        edges[i] = int(row[1]), int(row[2])
        keys[i] = np.uint64(int(row[3]))
    nb = int(next(it).split()[1])
    bline = next(it, "")
    bnd = np.array([int(x) for x in bline.split()], dtype=np.int64)
    if bnd.size != nb:
        raise GraphError("boundary count mismatch")
    mask = np.zeros(n, dtype=bool)
    mask[bnd] = True
    return Graph(n, edges, labels, mask, family, params, keys,
                 None if db == "-" else int(db))
