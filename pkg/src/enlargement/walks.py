"""Simple random walks on graph windows, traces, Green functions and the
two-walk intersection count.

Walk randomness comes from the WALK stream; a walk seed never produces the
same uniforms as a percolation seed with the same master.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import csr_visits, csr_walk
from .graph import Graph, GraphError, Subgraph, distances
from .percolation import Configuration, clusters
from .rng import WALK, derive_seed, derive_seeds
from .stats import wilson_interval

MAX_STEPS = "max_steps"
HIT_BOUNDARY = "hit_boundary"
_REASONS = (MAX_STEPS, HIT_BOUNDARY)


@dataclass(frozen=True, eq=False)
class WalkPath:
    start: int
    steps: np.ndarray
    edges: np.ndarray
    stopped_reason: str

    def __len__(self) -> int:
        return int(self.steps.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WalkPath):
            return NotImplemented
        return (self.start == other.start and self.stopped_reason == other.stopped_reason
                and np.array_equal(self.steps, other.steps))

    __hash__ = None


@dataclass(frozen=True)
class TwoSidedWalk:
    """Two independent walks glued at a common start; ``backward`` is the
    negative-time side."""

    forward: WalkPath
    backward: WalkPath

    @property
    def start(self) -> int:
        return self.forward.start


def walk_seed(seed: int, index: int = 0) -> int:
    return derive_seed(seed, WALK, index)


def sample_walk(g: Graph, start: int, max_steps: int, seed: int,
                stop_at_boundary: bool = False) -> WalkPath:
    """Walk from ``start``; step t moves to a uniform neighbour."""
    start = g.check_vertex(start)
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    if g.degree[start] == 0 and max_steps > 0:
        raise GraphError(f"start vertex {start} is isolated")
    path, used, reason = csr_walk(g.indptr, g.nbr, g.nbr_edge, start, int(max_steps),
                                  np.uint64(walk_seed(seed)), g.boundary, stop_at_boundary)
    return WalkPath(start, path, used, _REASONS[reason])


def sample_two_sided(g: Graph, start: int, steps_per_side: int, seed: int,
                     stop_at_boundary: bool = False) -> TwoSidedWalk:
    fwd = sample_walk(g, start, steps_per_side, derive_seed(seed, 1), stop_at_boundary)
    bwd = sample_walk(g, start, steps_per_side, derive_seed(seed, 2), stop_at_boundary)
    return TwoSidedWalk(fwd, bwd)


def trace_subgraph(g: Graph, *paths) -> Subgraph:
    """Visited vertices and traversed edges of one or more walks."""
    vm = np.zeros(g.n, dtype=bool)
    em = np.zeros(g.m, dtype=bool)
    for path in paths:
        sides = (path.forward, path.backward) if isinstance(path, TwoSidedWalk) else (path,)
        for w in sides:
            vm[w.steps] = True
            em[w.edges] = True
    return Subgraph(g, vm, em)


@dataclass(frozen=True)
class HittingStats:
    hit_prob: float
    hit_counts: np.ndarray
    first_hit_times: np.ndarray
    last_hit_times: np.ndarray
    exit_rate: float


def _target_mask(g: Graph, target_set) -> np.ndarray:
    ids = np.atleast_1d(np.asarray(list(target_set) if not isinstance(target_set, np.ndarray)
                                   else target_set, dtype=np.int64))
    if ids.size == 0:
        raise GraphError("target set is empty")
    mask = np.zeros(g.n, dtype=bool)
    mask[[g.check_vertex(v) for v in ids]] = True
    return mask


def hitting_stats(g: Graph, target_set, n_walks: int, horizon: int, seed: int,
                  start: int | None = None, stop_at_boundary: bool = True) -> HittingStats:
    """P(T_A <= horizon) with per-walk visit counts and last visit times (-1 if none).

    ``start`` defaults to the vertex labelled by the zero row (the origin of a box)."""
    mask = _target_mask(g, target_set)
    start = g.check_vertex(_center(g) if start is None else start)
    seeds = derive_seeds(seed, WALK, n_walks)
    total, first, last, exited = csr_visits(g.indptr, g.nbr, start, int(horizon), seeds,
                                            mask.astype(np.float64), g.boundary,
                                            stop_at_boundary)
    counts = total.astype(np.int64)
    return HittingStats(float(np.mean(first >= 0)), counts, first, last, float(exited.mean()))


@dataclass(frozen=True)
class GreenEstimate:
    target: int
    value: float
    std_err: float
    n_walks: int
    theta_p: float | None = None
    theta_p_std_err: float | None = None
    exit_rate: float = 0.0
    samples: np.ndarray = field(default=None, repr=False)
    samples_p: np.ndarray | None = field(default=None, repr=False)


def green_estimate(g: Graph, origin: int, target: int, n_walks: int, horizon: int, seed: int,
                   cfg: Configuration | None = None) -> GreenEstimate:
    """Mean number of visits to ``target`` before the walk leaves the window
    (or reaches ``horizon``); with ``cfg``, also the mean time spent in the open
    cluster of ``target``.  Both use the same walks."""
    origin = g.check_vertex(origin)
    target = g.check_vertex(target)
    seeds = derive_seeds(seed, WALK, n_walks)
    weight = np.zeros(g.n)
    weight[target] = 1.0
    tot, _, _, exited = csr_visits(g.indptr, g.nbr, origin, int(horizon), seeds, weight,
                                   g.boundary, True)
    se = float(tot.std(ddof=1) / math.sqrt(n_walks)) if n_walks > 1 else 0.0
    theta_p = se_p = tot_p = None
    if cfg is not None:
        lab = clusters(g, cfg)
        wp = (lab.labels == lab.labels[target]).astype(np.float64)
        tot_p, _, _, _ = csr_visits(g.indptr, g.nbr, origin, int(horizon), seeds, wp,
                                    g.boundary, True)
        theta_p = float(tot_p.mean())
        se_p = float(tot_p.std(ddof=1) / math.sqrt(n_walks)) if n_walks > 1 else 0.0
    return GreenEstimate(target, float(tot.mean()), se, n_walks, theta_p, se_p,
                         float(exited.mean()), tot, tot_p)


@dataclass(frozen=True)
class IntersectionStat:
    k: int
    p_positive: float
    ci_low: float
    ci_high: float
    mean: float
    n_pairs: int


def intersection_statistic(g: Graph, k: int, seed: int, n_pairs: int,
                           origin: int | None = None) -> IntersectionStat:
    """Z_k: common vertices of two independent walks inside the annulus
    B(o, 2^k) minus B(o, 2^(k-1)), each walk run until it leaves B(o, 2^k)."""
    if origin is None:
        origin = _center(g)
    origin = g.check_vertex(origin)
    outer, inner = 2**k, 2 ** (k - 1)
    dist = distances(g, origin)
    annulus = (dist > inner) & (dist <= outer)
    if k < 1 or not annulus.any():
        raise GraphError(f"annulus for k={k} is empty")
    outside = (dist > outer) | (dist < 0)
    if not np.any(dist > outer):
        raise GraphError(f"window too small for k={k}: nothing beyond distance {outer}")
    max_steps = 1000 * outer * outer + 1000
    z = np.zeros(n_pairs, dtype=np.int64)
    for i in range(n_pairs):
        visited = []
        for side in (1, 2):
            s = np.uint64(walk_seed(seed, 2 * i + side))
            path, _, reason = csr_walk(g.indptr, g.nbr, g.nbr_edge, origin, max_steps, s,
                                       outside, True)
            if reason != 1:
                raise RuntimeError("walk did not leave the ball within the step budget")
            visited.append(np.unique(path[annulus[path]]))
        z[i] = np.intersect1d(visited[0], visited[1], assume_unique=True).size
    hits = int(np.sum(z > 0))
    lo, hi = wilson_interval(hits, n_pairs)
    return IntersectionStat(k, hits / n_pairs, lo, hi, float(z.mean()), n_pairs)


def _center(g: Graph) -> int:
    """Vertex labelled by the all-zero row, else vertex 0."""
    hits = np.flatnonzero(~g.labels.any(axis=1))
    return int(hits[0]) if hits.size else 0


# ---------------------------------------------------------------- text dump


def dumps_walk(w: WalkPath | TwoSidedWalk) -> str:
    """One vertex per line prefixed by its side: '+' forward, '-' backward."""
    sides = [("+", w.forward), ("-", w.backward)] if isinstance(w, TwoSidedWalk) else [("+", w)]
    lines = ["enlargement-walk 1", f"start {sides[0][1].start}",
             "reasons " + " ".join(s.stopped_reason for _, s in sides)]
    for mark, s in sides:
        lines += [f"{mark} {v}" for v in s.steps.tolist()]
    return "\n".join(lines) + "\n"


def loads_walk(text: str, g: Graph) -> WalkPath | TwoSidedWalk:
    lines = text.splitlines()
    if lines[0] != "enlargement-walk 1":
        raise ValueError("not an enlargement-walk v1 dump")
    start = int(lines[1].split()[1])
    reasons = lines[2].split()[1:]
    seqs: dict[str, list[int]] = {"+": [], "-": []}
    for line in lines[3:]:
        mark, v = line.split()
        seqs[mark].append(int(v))
    out = []
    for mark, reason in zip("+-", reasons):
        steps = np.asarray(seqs[mark], dtype=np.int64)
        if steps.size == 0 or steps[0] != start:
            raise ValueError("walk side does not begin at the start vertex")
        used = np.array([g.edge_id(int(a), int(b)) for a, b in zip(steps[:-1], steps[1:])],
                        dtype=np.int64)
        out.append(WalkPath(start, steps, used, reason))
    return out[0] if len(out) == 1 else TwoSidedWalk(out[0], out[1])
