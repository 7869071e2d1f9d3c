"""Bernoulli bond percolation on a graph window and the enlargement U(H).

A lazy configuration is a pair (seed, p): edge e is open iff
``u(seed, key_e) < p``.  The uniforms do not depend on p, so configurations
with the same seed are coupled and every increasing event is monotone in p.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from ._kernels import union_find_labels
from .graph import Graph, GraphError, Subgraph
from .rng import MASK64, uniforms

LAZY = "lazy"
MATERIALIZED = "materialized"


def _edge_mask(g: Graph, edges) -> np.ndarray:
    if isinstance(edges, np.ndarray) and edges.dtype == bool:
        if edges.shape != (g.m,):
            raise GraphError("edge mask does not match the graph")
        return edges.copy()
    mask = np.zeros(g.m, dtype=bool)
    ids = np.fromiter((int(e) for e in edges), dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= g.m):
        raise GraphError("unknown edge id")
    mask[ids] = True
    return mask


@dataclass(frozen=True, eq=False)
class Configuration:
    graph: Graph
    mode: str
    p: float | None
    seed: int | None
    forced: np.ndarray
    bits: np.ndarray | None = None

    @cached_property
    def u(self) -> np.ndarray:
        """Per-edge uniforms (lazy mode only)."""
        if self.mode != LAZY:
            raise ValueError("materialized configurations carry no uniforms")
        return uniforms(self.seed, self.graph.edge_keys)

    @cached_property
    def open_mask(self) -> np.ndarray:
        if self.mode == LAZY:
            m = (self.u < self.p) | self.forced
        else:
            m = self.bits | self.forced
        m.setflags(write=False)
        return m

    @property
    def open_edges(self) -> np.ndarray:
        return np.flatnonzero(self.open_mask)

    def at(self, p: float) -> "Configuration":
        """Same seed and forced edges, another p (coupled)."""
        if self.mode != LAZY:
            raise ValueError("only lazy configurations can be re-thresholded")
        return Configuration(self.graph, LAZY, float(p), self.seed, self.forced)

    def materialize(self) -> "Configuration":
        return Configuration(self.graph, MATERIALIZED, self.p, self.seed, self.forced,
                             self.open_mask.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration) or other.graph is not self.graph:
            return NotImplemented
        return bool(np.array_equal(self.open_mask, other.open_mask))

    __hash__ = None


def sample_config(g: Graph, p: float, seed: int, forced_open: Iterable[int] | np.ndarray = ()
                  ) -> Configuration:
    """Lazy configuration: edge e open iff e is forced or u(seed, key_e) < p."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    forced = _edge_mask(g, forced_open)
    forced.setflags(write=False)
    return Configuration(g, LAZY, p, int(seed) & MASK64, forced)


def from_open_edges(g: Graph, open_edges, forced_open=(), p: float | None = None,
                    seed: int | None = None) -> Configuration:
    """Materialized configuration with the given open set."""
    bits = _edge_mask(g, open_edges)
    forced = _edge_mask(g, forced_open)
    forced.setflags(write=False)
    return Configuration(g, MATERIALIZED, p, seed, forced, bits)


def all_closed(g: Graph) -> Configuration:
    return from_open_edges(g, np.zeros(g.m, dtype=bool))


def edge_state(cfg: Configuration, e: int) -> bool:
    """True iff edge e is open."""
    e = int(e)
    if not 0 <= e < cfg.graph.m:
        raise GraphError(f"unknown edge {e}")
    if cfg.forced[e]:
        return True
    if cfg.mode == LAZY:
        return bool(uniforms(cfg.seed, cfg.graph.edge_keys[e:e + 1])[0] < cfg.p)
    return bool(cfg.bits[e])


def combine(cfg1: Configuration, cfg2: Configuration) -> Configuration:
    """Edgewise maximum of two configurations on the same graph."""
    if cfg1.graph is not cfg2.graph:
        raise GraphError("configurations live on different graphs")
    return from_open_edges(cfg1.graph, cfg1.open_mask | cfg2.open_mask)


@dataclass(frozen=True, eq=False)
class ClusterLabeling:
    """Component label per vertex (the minimum vertex id of the component)."""

    labels: np.ndarray
    size: np.ndarray
    touches_boundary: np.ndarray

    def cluster_of(self, x: int) -> np.ndarray:
        return np.flatnonzero(self.labels == self.labels[x])

    @property
    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.labels == np.arange(self.labels.size))


def label_components(g: Graph, edge_mask: np.ndarray) -> ClusterLabeling:
    e = g.edges[edge_mask]
    labels = union_find_labels(g.n, e[:, 0].copy(), e[:, 1].copy())
    size = np.bincount(labels, minlength=g.n)
    touch = np.bincount(labels, weights=g.boundary, minlength=g.n) > 0
    return ClusterLabeling(labels, size, touch)


def clusters(g: Graph, cfg: Configuration) -> ClusterLabeling:
    if cfg.graph is not g:
        raise GraphError("configuration belongs to another graph")
    return label_components(g, cfg.open_mask)


def open_cluster(g: Graph, cfg: Configuration, x: int,
                 labeling: ClusterLabeling | None = None) -> Subgraph:
    x = g.check_vertex(x)
    lab = labeling if labeling is not None else clusters(g, cfg)
    vm = lab.labels == lab.labels[x]
    em = cfg.open_mask & vm[g.edges[:, 0]]
    return Subgraph(g, vm, em)


def enlarge(g: Graph, h: Subgraph, cfg: Configuration,
            labeling: ClusterLabeling | None = None) -> Subgraph:
    """U(H): H plus the open clusters of all its vertices, with their open edges."""
    if h.parent is not g or cfg.graph is not g:
        raise GraphError("subgraph and configuration must live on g")
    lab = labeling if labeling is not None else clusters(g, cfg)
    hit = np.zeros(g.n, dtype=bool)
    hit[lab.labels[h.vertex_mask]] = True
    vm = hit[lab.labels] | h.vertex_mask
    em = (cfg.open_mask & vm[g.edges[:, 0]]) | h.edge_mask
    return Subgraph(g, vm, em)


def spans_boundary(g: Graph, labeling: ClusterLabeling, x: int) -> bool:
    """Does the open cluster of x contain a boundary vertex?"""
    x = g.check_vertex(x)
    return bool(labeling.touches_boundary[labeling.labels[x]])


# ---------------------------------------------------------------- snapshots


def dumps_config(cfg: Configuration) -> str:
    seed = "-" if cfg.seed is None else str(cfg.seed)
    p = "-" if cfg.p is None else repr(float(cfg.p))
    forced = np.flatnonzero(cfg.forced).tolist()
    lines = ["enlargement-config 1", f"seed {seed}", f"p {p}", f"mode {cfg.mode}",
             f"edges {cfg.graph.m}", "forced " + " ".join(map(str, [len(forced)] + forced)),
             f"open {int(cfg.open_mask.sum())}"]
    lines += [str(e) for e in cfg.open_edges.tolist()]
    return "\n".join(lines) + "\n"


def loads_config(text: str, g: Graph) -> Configuration:
    lines = text.splitlines()
    if lines[0] != "enlargement-config 1":
        raise ValueError("not an enlargement-config v1 snapshot")
    fields = dict(line.split(" ", 1) for line in lines[1:6])
    if int(fields["edges"]) != g.m:
        raise GraphError("snapshot was taken on a graph with another edge count")
    seed = None if fields["seed"] == "-" else int(fields["seed"])
    p = None if fields["p"] == "-" else float(fields["p"])
    forced = [int(x) for x in fields["forced"].split()[1:]]
    n_open = int(lines[6].split()[1])
    open_ids = [int(x) for x in lines[7:7 + n_open]]
    if fields["mode"] == LAZY:
        cfg = sample_config(g, p, seed, forced)
        if not np.array_equal(cfg.open_edges, np.asarray(open_ids, dtype=np.int64)):
            raise ValueError("snapshot open set disagrees with its seed")
        return cfg
    return from_open_edges(g, open_ids, forced, p, seed)
