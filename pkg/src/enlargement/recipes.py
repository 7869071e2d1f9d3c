"""Rules producing the subgraph H for a trial.

A recipe is a picklable object with ``sample(g, seed) -> Subgraph`` and a
``random`` flag; random recipes are redrawn in every trial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Bipartition, Graph, GraphError, Subgraph, line_graph_backbone
from .walks import sample_two_sided, sample_walk, trace_subgraph


def center_vertex(g: Graph) -> int:
    zero = np.flatnonzero(~g.labels.any(axis=1))
    return int(zero[0]) if zero.size else 0


@dataclass(frozen=True)
class Vertices:
    """H = the given vertices (default: the center), no edges."""

    ids: tuple = ()
    random = False

    def sample(self, g: Graph, seed: int = 0) -> Subgraph:
        ids = self.ids or (center_vertex(g),)
        return Subgraph.from_ids(g, [g.check_vertex(v) for v in ids])


@dataclass(frozen=True)
class WholeGraph:
    random = False

    def sample(self, g: Graph, seed: int = 0) -> Subgraph:
        return Subgraph.full(g)


@dataclass(frozen=True)
class Fixed:
    """A subgraph given by vertex and edge ids."""

    vertices: tuple
    edges: tuple = ()
    random = False

    def sample(self, g: Graph, seed: int = 0) -> Subgraph:
        return Subgraph.from_ids(g, self.vertices, self.edges)


@dataclass(frozen=True)
class Backbone:
    random = False

    def sample(self, g: Graph, seed: int = 0) -> Subgraph:
        return line_graph_backbone(g)


@dataclass(frozen=True)
class Trace:
    """Trace of a walk from the center, stopped at the boundary or after ``steps``."""

    steps: int
    two_sided: bool = False
    stop_at_boundary: bool = True
    random = True

    def sample(self, g: Graph, seed: int = 0) -> Subgraph:
        o = center_vertex(g)
        if self.two_sided:
            return trace_subgraph(g, sample_two_sided(g, o, self.steps, seed,
                                                      self.stop_at_boundary))
        return trace_subgraph(g, sample_walk(g, o, self.steps, seed, self.stop_at_boundary))


@dataclass(frozen=True)
class PECounterexample:
    """Percolating-everywhere H built across a bipartition (side A = labels[:, 0] == side)."""

    side: int = 1
    random = False

    def sample(self, g: Graph, seed: int = 0) -> Subgraph:
        from .properties import build_pe_counterexample

        part, a0, b0 = default_partition(g, self.side)
        return build_pe_counterexample(g, a0, b0, part)


def default_partition(g: Graph, side: int = 1) -> tuple[Bipartition, int, int]:
    """Partition used by the counterexample recipe.

    glued trees: A = the given side without the glue vertex.  regular tree: A =
    the subtree below the first child of the root."""
    if g.family == "glued_trees":
        in_a = g.labels[:, 0] == side
        a0 = int(np.flatnonzero(in_a)[0])
        return Bipartition(in_a), a0, 0
    if g.family == "regular_tree":
        from .graph import subtree_split

        e = int(np.flatnonzero(g.edges[:, 0] == 0)[0])
        child = int(g.edges[e, 1])
        sub = subtree_split(g, e, child)
        return Bipartition(sub.vertex_mask), child, 0
    raise GraphError(f"no default partition for family {g.family!r}")
