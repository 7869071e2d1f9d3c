"""Property checkers for subgraphs of a window.

Every infinite notion is read at the scale of the window: "infinite
component" means "component containing a boundary vertex".  Verdicts say
``holds_at_scale`` / ``fails_at_scale`` / ``inconclusive`` and always carry
their raw evidence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from ._kernels import csr_visits, separating_bridges
from .graph import Bipartition, Graph, GraphError, Subgraph, bipartition_cut, distances
from .percolation import label_components
from .resistance import Disconnected, effective_resistance, resistance_profile
from .rng import WALK, derive_seeds
from .stats import mean_ci, ols_slopes

HOLDS = "holds_at_scale"
FAILS = "fails_at_scale"
INCONCLUSIVE = "inconclusive"

EPS_TAIL = 0.25

PROPERTIES = ("transient", "finitely_many_cut_points", "no_cut_points", "recurrent_subset",
              "connected", "percolating_everywhere", "ti", "spans_boundary")


class PreconditionError(GraphError):
    pass


@dataclass(frozen=True)
class PropertyVerdict:
    property: str
    verdict: str
    reason: str | None = None
    evidence: dict = field(default_factory=dict)
    window: int | None = None

    def __post_init__(self):
        if self.verdict not in (HOLDS, FAILS, INCONCLUSIVE):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.verdict == INCONCLUSIVE and not self.reason:
            raise ValueError("inconclusive verdicts need a reason")

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_record(self) -> str:
        """Tab-separated: property, verdict, window, reason, evidence (JSON)."""
        w = "-" if self.window is None else str(self.window)
        ev = json.dumps(_jsonable(self.evidence), sort_keys=True, separators=(",", ":"))
        return "\t".join([self.property, self.verdict, w, self.reason or "-", ev])

    @classmethod
    def from_record(cls, line: str) -> "PropertyVerdict":
        prop, verdict, w, reason, ev = line.rstrip("\n").split("\t")
        return cls(prop, verdict, None if reason == "-" else reason, json.loads(ev),
                   None if w == "-" else int(w))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in (x.tolist() if isinstance(x, np.ndarray) else x)]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else ("-inf" if x < 0 else "nan"))
    if isinstance(x, Fraction):
        return str(x)
    return x


# ---------------------------------------------------------------- connectivity


def components(sub: Subgraph) -> np.ndarray:
    """Component label per vertex of the parent (-1 outside the subgraph)."""
    lab = label_components(sub.parent, sub.edge_mask).labels.copy()
    lab[~sub.vertex_mask] = -1
    return lab


def is_connected(sub: Subgraph) -> bool:
    verts = sub.vertices
    if verts.size == 0:
        return True
    d = distances(sub.parent, verts[0], edge_mask=sub.edge_mask, vertex_mask=sub.vertex_mask)
    return bool(np.all(d[verts] >= 0))


def is_percolating_everywhere(g: Graph, h: Subgraph) -> bool:
    """H spans V(g) and each of its components contains a boundary vertex."""
    if h.parent is not g:
        raise GraphError("h is not a subgraph of g")
    if not h.vertex_mask.all():
        return False
    lab = label_components(g, h.edge_mask)
    return bool(lab.touches_boundary[lab.roots].all())


def as_graph(sub: Subgraph, family: str | None = None) -> tuple[Graph, np.ndarray]:
    """The subgraph as a standalone Graph plus the map new id -> parent id."""
    g = sub.parent
    keep = sub.vertices
    new = np.full(g.n, -1, dtype=np.int64)
    new[keep] = np.arange(keep.size)
    eids = sub.edges
    e = new[g.edges[eids]]
    out = Graph(keep.size, e, g.labels[keep], g.boundary[keep], family or g.family + "_sub",
                dict(g.params), g.edge_keys[eids], g.degree_bound)
    return out, keep


# ---------------------------------------------------------------- transience


def transience_verdict(radii: Sequence[int], r: np.ndarray, eps_tail: float = EPS_TAIL,
                       window: int | None = None) -> PropertyVerdict:
    radii = [int(x) for x in radii]
    ev = {"radii": radii, "r_eff": np.asarray(r, dtype=float), "eps_tail": eps_tail}
    if np.isinf(r).any():
        return PropertyVerdict("transient", FAILS, "component_finite_at_scale", ev, window)
    n_max = radii[-1]
    halves = [i for i, n in enumerate(radii) if n <= n_max / 2]
    if not halves:
        return PropertyVerdict("transient", INCONCLUSIVE, "no_radius_below_half_max", ev, window)
    i_half = halves[-1]
    r_half, r_max = float(r[i_half]), float(r[-1])
    ratio = (r_max - r_half) / r_half if r_half > 0 else math.inf
    ev["tail_ratio"] = ratio
    if ratio <= eps_tail:
        return PropertyVerdict("transient", HOLDS, None, ev, window)
    incs = np.diff(np.asarray(r, dtype=float)[i_half:])
    if incs.size and np.all(incs > 0):
        return PropertyVerdict("transient", FAILS, "resistance_keeps_growing", ev, window)
    return PropertyVerdict("transient", INCONCLUSIVE, "mixed_increments", ev, window)


def transience_proxy(sub: Subgraph, center: int, radii: Sequence[int],
                     eps_tail: float = EPS_TAIL) -> tuple[PropertyVerdict, np.ndarray]:
    """Resistance growth test.  Transient at scale when the last dyadic step
    adds at most ``eps_tail`` relative resistance; recurrent at scale when the
    resistance still grows at every step of the top half of the radii."""
    g = sub.parent
    center = g.check_vertex(center)
    radii = [int(x) for x in radii]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] < 0:
        raise ValueError("radii must be increasing and nonnegative")
    if not sub.vertex_mask[center]:
        raise GraphError("center is not in the subgraph")
    if not sub.edge_mask[g.nbr_edge[g.indptr[center]:g.indptr[center + 1]]].any():
        raise GraphError("center is isolated in the subgraph")
    r = resistance_profile(sub, center, radii)
    return transience_verdict(radii, r, eps_tail, radii[-1]), r


# ---------------------------------------------------------------- cut points


def _window_mask(g: Graph, center, radius, window_mask) -> np.ndarray:
    if window_mask is not None:
        return np.asarray(window_mask, dtype=bool)
    if center is None:
        return np.ones(g.n, dtype=bool)
    return distances(g, center, cutoff=int(radius)) >= 0


def separating_edges(sub: Subgraph) -> np.ndarray:
    """EdgeIds of sub whose removal leaves two parts that both touch the boundary."""
    g = sub.parent
    return np.flatnonzero(separating_bridges(g.indptr, g.nbr, g.nbr_edge, sub.edge_mask,
                                             sub.vertex_mask, g.boundary & sub.vertex_mask))


def cut_points(sub: Subgraph, window_center: int | None = None, window_radius: int = 0,
               window_mask: np.ndarray | None = None) -> np.ndarray:
    """Vertices x in the window such that removing one edge at x splits x's
    component into two pieces each reaching the boundary.

    The window is the parent-graph ball around ``window_center`` or an
    explicit vertex mask."""
    g = sub.parent
    win = _window_mask(g, window_center, window_radius, window_mask)
    ends = g.edges[separating_edges(sub)].ravel()
    hit = np.zeros(g.n, dtype=bool)
    hit[ends] = True
    return np.flatnonzero(hit & win)


# ---------------------------------------------------------------- recurrent subsets


def visit_trend_verdict(horizons: Sequence[int], counts: np.ndarray,
                        window: int | None = None, level: float = 0.95) -> PropertyVerdict:
    """Per-walk slope of visit count against log10(horizon); recurrent at scale
    if the CI of the mean slope excludes 0 from above, transient if it covers 0."""
    counts = np.asarray(counts, dtype=float)
    x = np.log10(np.asarray(horizons, dtype=float))
    slopes = ols_slopes(x, counts)
    m, lo, hi = mean_ci(slopes, level)
    ev = {"horizons": list(map(int, horizons)), "mean_visits": counts.mean(axis=0),
          "slope": m, "ci_low": lo, "ci_high": hi, "n_walks": int(counts.shape[0])}
    if lo > 0:
        return PropertyVerdict("recurrent_subset", HOLDS, None, ev, window)
    if lo <= 0 <= hi:
        return PropertyVerdict("recurrent_subset", FAILS, "visits_saturate", ev, window)
    return PropertyVerdict("recurrent_subset", INCONCLUSIVE, "negative_trend", ev, window)


def recurrent_subset_estimate(g: Graph, a: Subgraph, n_walks: int, horizons: Sequence[int],
                              seed: int, start: int | None = None,
                              stop_at_boundary: bool = True) -> PropertyVerdict:
    """Trend of the number of visits (times 1..n) to V(a) over growing horizons."""
    if a.n_vertices == 0:
        raise GraphError("subset is empty")
    horizons = sorted(int(h) for h in horizons)
    if len(horizons) < 2 or horizons[0] < 1:
        raise ValueError("need at least two positive horizons")
    if start is None:
        zero = np.flatnonzero(~g.labels.any(axis=1))
        start = int(zero[0]) if zero.size else 0
    start = g.check_vertex(start)
    seeds = derive_seeds(seed, WALK, n_walks)
    w = a.vertex_mask.astype(np.float64)
    counts = np.empty((n_walks, len(horizons)))
    for j, h in enumerate(horizons):
        tot, _, _, _ = csr_visits(g.indptr, g.nbr, start, h, seeds, w, g.boundary,
                                  stop_at_boundary)
        counts[:, j] = tot - w[start]
    return visit_trend_verdict(horizons, counts)


# ---------------------------------------------------------------- (TI) and quotients


def ti_check(g: Graph, partitions: Iterable[Bipartition], threshold: int) -> PropertyVerdict:
    """Cut sizes along a caller-supplied ladder of bipartitions."""
    counts, used = [], []
    for part in partitions:
        a = part.in_a
        if a.shape != (g.n,):
            raise GraphError("partition does not match the graph")
        if a.all() or not a.any():
            raise GraphError("degenerate partition: one side is empty")
        c = int(bipartition_cut(g, part).size)
        counts.append(c)
        used.append(bool((g.boundary & a).any() and (g.boundary & ~a).any()))
    ev = {"cut_counts": counts, "both_sides_reach_boundary": used, "threshold": threshold}
    relevant = [c for c, u in zip(counts, used) if u]
    if not relevant:
        return PropertyVerdict("ti", INCONCLUSIVE, "no_partition_with_two_infinite_sides", ev)
    ev["min_cut"] = min(relevant)
    return PropertyVerdict("ti", FAILS if min(relevant) < threshold else HOLDS, None, ev)


def bridge_partition(sub: Subgraph, e: int) -> Bipartition:
    """Sides of sub's component split by the bridge e (the rest joins side B)."""
    g = sub.parent
    em = sub.edge_mask.copy()
    em[e] = False
    u = int(g.edges[e, 0])
    side = distances(g, u, edge_mask=em, vertex_mask=sub.vertex_mask) >= 0
    if side[g.edges[e, 1]]:
        raise GraphError("edge is not a bridge")
    return Bipartition(side)


@dataclass(frozen=True, eq=False)
class QuotientGraph:
    classes: np.ndarray
    n_classes: int
    multi_edges: dict

    def count(self, c1: int, c2: int) -> int:
        for c in (c1, c2):
            if not 0 <= c < self.n_classes:
                raise GraphError(f"unknown class {c}")
        return self.multi_edges.get((min(c1, c2), max(c1, c2)), 0) if c1 != c2 else 0

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.classes == c)


def quotient_graph(g: Graph, h: Subgraph) -> QuotientGraph:
    """Collapse each component of a percolating-everywhere H to one vertex."""
    if not is_percolating_everywhere(g, h):
        raise PreconditionError("h is not percolating everywhere")
    lab = label_components(g, h.edge_mask).labels
    _, classes = np.unique(lab, return_inverse=True)
    cu, cv = classes[g.edges[:, 0]], classes[g.edges[:, 1]]
    cross = cu != cv
    pairs = np.stack([np.minimum(cu, cv)[cross], np.maximum(cu, cv)[cross]], axis=1)
    multi = {}
    if pairs.size:
        uniq, cnt = np.unique(pairs, axis=0, return_counts=True)
        multi = {(int(a), int(b)): int(c) for (a, b), c in zip(uniq, cnt)}
    return QuotientGraph(classes, int(classes.max()) + 1 if g.n else 0, multi)


def quotient_edge_prob(q: QuotientGraph, c1: int, c2: int, p):
    """1 - (1 - p)^|E([x],[y])|; exact when p is a Fraction."""
    k = q.count(c1, c2)
    if k == 0:
        return Fraction(0) if isinstance(p, Fraction) else 0.0
    return 1 - (1 - p) ** k


def kalikow_weiss_diagnostic(q: QuotientGraph, p, ladder: Sequence) -> dict:
    """Smallest sum of quotient edge probabilities across the given class cuts.

    Each ladder entry is a collection of class ids forming side A."""
    if q.n_classes <= 1:
        return {"min_cut_sum": math.inf, "cut_sums": []}
    if not ladder:
        raise ValueError("ladder is empty")
    sums = []
    for side in ladder:
        in_a = np.zeros(q.n_classes, dtype=bool)
        in_a[np.asarray(list(side), dtype=np.int64)] = True
        if in_a.all() or not in_a.any():
            continue
        sums.append(sum(quotient_edge_prob(q, a, b, p) for (a, b) in q.multi_edges
                        if in_a[a] != in_a[b]))
    return {"min_cut_sum": min(sums) if sums else math.inf, "cut_sums": sums}


def build_pe_counterexample(g: Graph, a0: int, b0: int, part: Bipartition) -> Subgraph:
    """H = G minus E_{A,B} for a bipartition with a finite cut.

    E_A: cut edges whose A-end is joined to a0 inside A.  E_{A,B}: those edges
    of E_A whose B-end is joined to b0 in G - E_A.  The cut counts as finite at
    scale when none of its edges touches the boundary."""
    a0, b0 = g.check_vertex(a0), g.check_vertex(b0)
    in_a = part.in_a
    if not in_a[a0] or in_a[b0]:
        raise PreconditionError("a0 must lie in A and b0 in B")
    cut = bipartition_cut(g, part)
    if cut.size == 0:
        raise PreconditionError("the partition has an empty cut")
    if g.boundary[g.edges[cut]].any():
        raise PreconditionError("cut is not finite at this scale (it reaches the boundary)")
    e = g.edges
    within_a = in_a[e[:, 0]] & in_a[e[:, 1]]
    within_b = ~in_a[e[:, 0]] & ~in_a[e[:, 1]]
    da = distances(g, a0, edge_mask=within_a, vertex_mask=in_a) >= 0
    db = distances(g, b0, edge_mask=within_b, vertex_mask=~in_a) >= 0
    if not (da & g.boundary).any() or not (db & g.boundary).any():
        raise PreconditionError("a0 or b0 does not reach the boundary on its side")
    a_end = np.where(in_a[e[cut, 0]], e[cut, 0], e[cut, 1])
    b_end = np.where(in_a[e[cut, 0]], e[cut, 1], e[cut, 0])
    e_a = cut[da[a_end]]
    keep = np.ones(g.m, dtype=bool)
    keep[e_a] = False
    reach_b = distances(g, b0, edge_mask=keep) >= 0
    e_ab = e_a[reach_b[b_end[da[a_end]]]]
    em = np.ones(g.m, dtype=bool)
    em[e_ab] = False
    h = Subgraph(g, np.ones(g.n, dtype=bool), em)
    lab = label_components(g, em)
    roots = lab.roots
    if roots.size != 2 or not lab.touches_boundary[roots].all():
        raise PreconditionError(f"construction gave {roots.size} components, expected 2 "
                                "both reaching the boundary")
    return h


# ---------------------------------------------------------------- registry


@dataclass(frozen=True)
class PropertySpec:
    name: str
    increasing: bool
    needs_connected: bool
    check: Callable


def _check_connected(u: Subgraph, h: Subgraph, params: dict) -> PropertyVerdict:
    return PropertyVerdict("connected", HOLDS if is_connected(u) else FAILS)


def _check_spans(u: Subgraph, h: Subgraph, params: dict) -> PropertyVerdict:
    ok = bool((u.vertex_mask & u.parent.boundary).any())
    return PropertyVerdict("spans_boundary", HOLDS if ok else FAILS)


def _check_pe(u: Subgraph, h: Subgraph, params: dict) -> PropertyVerdict:
    ok = is_percolating_everywhere(u.parent, u)
    return PropertyVerdict("percolating_everywhere", HOLDS if ok else FAILS)


def _center_of(u: Subgraph, params: dict) -> int:
    if "center" in params:
        return int(params["center"])
    zero = np.flatnonzero(~u.parent.labels.any(axis=1))
    return int(zero[0]) if zero.size else 0


def _check_transient(u: Subgraph, h: Subgraph, params: dict) -> PropertyVerdict:
    center = _center_of(u, params)
    if not u.vertex_mask[center]:
        return PropertyVerdict("transient", INCONCLUSIVE, "center_not_in_subgraph")
    try:
        verdict, _ = transience_proxy(u, center, params["radii"], params.get("eps_tail", EPS_TAIL))
    except GraphError as exc:
        return PropertyVerdict("transient", INCONCLUSIVE, f"center_isolated: {exc}")
    return verdict


def _cut_window(u: Subgraph, params: dict):
    return _center_of(u, params), int(params.get("window_radius", 0))


def _check_no_cut(u: Subgraph, h: Subgraph, params: dict) -> PropertyVerdict:
    c, r = _cut_window(u, params)
    pts = cut_points(u, c, r) if r > 0 else cut_points(u)
    return PropertyVerdict("no_cut_points", FAILS if pts.size else HOLDS, None,
                           {"cut_points": int(pts.size)}, r or None)


def _check_finite_cut(u: Subgraph, h: Subgraph, params: dict) -> PropertyVerdict:
    # confined: no cut point in the outer half of the window
    c, r = _cut_window(u, params)
    if r <= 0:
        raise ValueError("finitely_many_cut_points needs window_radius")
    pts = cut_points(u, c, r)
    d = distances(u.parent, c, cutoff=r)
    outer = pts[d[pts] > r // 2]
    return PropertyVerdict("finitely_many_cut_points", FAILS if outer.size else HOLDS, None,
                           {"cut_points": int(pts.size), "outer": int(outer.size)}, r)


def _check_recurrent(u: Subgraph, h: Subgraph, params: dict) -> PropertyVerdict:
    return recurrent_subset_estimate(u.parent, u, int(params.get("n_walks", 100)),
                                     params["horizons"], int(params.get("walk_seed", 0)))


def _check_ti(u: Subgraph, h: Subgraph, params: dict) -> PropertyVerdict:
    g, _ = as_graph(u)
    sub = Subgraph.full(g)
    parts = [bridge_partition(sub, int(e)) for e in separating_edges(sub)]
    if not parts:
        return PropertyVerdict("ti", INCONCLUSIVE, "no_separating_bridge_to_test")
    return ti_check(g, parts, int(params.get("threshold", 2)))


REGISTRY: dict[str, PropertySpec] = {
    "connected": PropertySpec("connected", True, False, _check_connected),
    "spans_boundary": PropertySpec("spans_boundary", True, False, _check_spans),
    "percolating_everywhere": PropertySpec("percolating_everywhere", True, False, _check_pe),
    "transient": PropertySpec("transient", True, True, _check_transient),
    "no_cut_points": PropertySpec("no_cut_points", False, True, _check_no_cut),
    "finitely_many_cut_points": PropertySpec("finitely_many_cut_points", False, True,
                                             _check_finite_cut),
    "recurrent_subset": PropertySpec("recurrent_subset", False, False, _check_recurrent),
    "ti": PropertySpec("ti", False, True, _check_ti),
}


def get_property(name: str) -> PropertySpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown property {name!r}; known: {sorted(REGISTRY)}") from None


def check_property(name: str, u: Subgraph, h: Subgraph | None = None,
                   params: dict | None = None) -> PropertyVerdict:
    return get_property(name).check(u, h, params or {})
