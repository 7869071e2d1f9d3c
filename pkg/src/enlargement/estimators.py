"""Monte Carlo estimation of P_p(U(H) has the property), coupled sweeps over
p, threshold extraction and critical-point calibration.

Trial i always uses percolation seed ``derive_seed(master, PERCOLATION, i)``
and subgraph seed ``derive_seed(master, SUBGRAPH, i)``; grid points share the
trial's uniforms.  Splitting trials over worker processes therefore cannot
change any number.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._kernels import bfs_dist, prim_critical
from .graph import Graph, GraphError, LazyRegularTree, Subgraph, build_zd_box
from .lattice import ZdLattice
from .percolation import enlarge, from_open_edges
from .properties import INCONCLUSIVE, check_property, get_property
from .recipes import Fixed, Vertices, center_vertex
from .rng import PERCOLATION, SUBGRAPH, derive_seed, derive_seeds, uniforms
from .stats import ols_slope, wilson_interval

DEFAULT_DELTA = 0.01
INCONCLUSIVE_LIMIT = 0.2
FAST_PROPERTIES = ("connected", "spans_boundary")
WORKERS_ENV = "ENLARGEMENT_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def default_grid(points: int = 21) -> np.ndarray:
    """Evenly spaced interior grid of (0, 1)."""
    return np.linspace(0, 1, points + 2)[1:-1]


@dataclass(frozen=True)
class ProbEstimate:
    p: float
    trials: int
    successes: int
    point: float
    ci_low: float
    ci_high: float
    inconclusive: int = 0
    flagged: bool = False

    @classmethod
    def from_counts(cls, p: float, trials: int, successes: int, inconclusive: int = 0):
        lo, hi = wilson_interval(successes, trials)
        return cls(float(p), int(trials), int(successes), successes / trials, lo, hi,
                   int(inconclusive), inconclusive > INCONCLUSIVE_LIMIT * trials)


@dataclass(frozen=True)
class EventSpec:
    """Graph window, H recipe, property name and checker parameters.

    ``h`` may also be a plain Subgraph of ``graph``; it is stored as a Fixed recipe.
    """

    graph: Graph
    h: object = field(default_factory=Vertices)
    property: str = "spans_boundary"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.h, Subgraph):
            fixed = Fixed(tuple(self.h.vertices.tolist()), tuple(self.h.edges.tolist()))
            object.__setattr__(self, "h", fixed)


def window_radius(g: Graph) -> int | None:
    for key in ("radius", "depth", "levels", "z2_radius"):
        if key in g.params:
            return int(g.params[key])
    return None


# ---------------------------------------------------------------- trial engine


def _fixed_h(spec: EventSpec) -> Subgraph | None:
    return None if getattr(spec.h, "random", False) else spec.h.sample(spec.graph, 0)


def _critical(spec: EventSpec, h: Subgraph, pseeds: np.ndarray) -> np.ndarray:
    """Per-trial smallest p at which the (increasing) property holds."""
    g = spec.graph
    hv = h.vertices
    if hv.size == 0:
        raise GraphError("H has no vertices")
    if spec.property == "spans_boundary":
        return prim_critical(g.indptr, g.nbr, g.nbr_edge, g.edge_keys, h.edge_mask, pseeds,
                             hv, g.boundary, False, 1)
    return prim_critical(g.indptr, g.nbr, g.nbr_edge, g.edge_keys, h.edge_mask, pseeds,
                         hv[:1], h.vertex_mask, True, int(hv.size))


def _run_chunk(args):
    """Trials lo..hi-1: either critical values (fast path) or success and
    inconclusive matrices over the grid."""
    spec, grid, master, lo, hi, fast = args
    g = spec.graph
    idx = np.arange(lo, hi)
    pseeds = np.array([derive_seed(master, PERCOLATION, int(i)) for i in idx], dtype=np.uint64)
    fixed = _fixed_h(spec)
    if fast:
        if fixed is not None:
            return _critical(spec, fixed, pseeds)
        out = np.empty(idx.size)
        for j, i in enumerate(idx):
            h = spec.h.sample(g, derive_seed(master, SUBGRAPH, int(i)))
            out[j] = _critical(spec, h, pseeds[j:j + 1])[0]
        return out
    succ = np.zeros((idx.size, len(grid)), dtype=bool)
    inc = np.zeros((idx.size, len(grid)), dtype=bool)
    for j, i in enumerate(idx):
        h = fixed if fixed is not None else spec.h.sample(g, derive_seed(master, SUBGRAPH, int(i)))
        u = uniforms(int(pseeds[j]), g.edge_keys)
        for k, p in enumerate(grid):
            cfg = from_open_edges(g, u < p, p=p, seed=int(pseeds[j]))
            v = check_property(spec.property, enlarge(g, h, cfg), h, spec.params)
            succ[j, k] = v.holds
            inc[j, k] = v.verdict == INCONCLUSIVE
    return succ, inc


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    n = max(1, min(workers, trials))
    b = np.linspace(0, trials, n + 1).astype(int)
    return [(int(x), int(y)) for x, y in zip(b[:-1], b[1:]) if y > x]


def _map(func, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [func(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, jobs))


def is_fast(spec: EventSpec) -> bool:
    return spec.property in FAST_PROPERTIES


def trial_outcomes(spec: EventSpec, grid: Sequence[float], trials: int, master_seed: int,
                   workers: int = 1):
    """(successes, inconclusive) boolean matrices of shape (trials, len(grid)),
    plus per-trial critical values on the fast path (else None)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    grid = [float(p) for p in grid]
    fast = is_fast(spec)
    jobs = [(spec, grid, int(master_seed), lo, hi, fast) for lo, hi in _chunks(trials, workers)]
    parts = _map(_run_chunk, jobs, workers)
    if fast:
        crit = np.concatenate(parts)
        succ = crit[:, None] < np.asarray(grid)[None, :]
        return succ, np.zeros_like(succ), crit
    return (np.concatenate([a for a, _ in parts]), np.concatenate([b for _, b in parts]), None)


def _estimates(grid, succ, inc) -> list[ProbEstimate]:
    n = succ.shape[0]
    return [ProbEstimate.from_counts(p, n, int(succ[:, k].sum()), int(inc[:, k].sum()))
            for k, p in enumerate(grid)]


def estimate_event_prob(spec: EventSpec, p: float, trials: int, master_seed: int,
                        workers: int = 1) -> ProbEstimate:
    succ, inc, _ = trial_outcomes(spec, [p], trials, master_seed, workers)
    return _estimates([p], succ, inc)[0]


# ---------------------------------------------------------------- thresholds


@dataclass(frozen=True)
class Threshold:
    value: float
    relation: str = "="  # '<': below the first grid point, '>': above the last
    method: str = ""

    def __str__(self) -> str:
        v = f"{self.value:.6g}"
        return v if self.relation == "=" else f"{self.relation} {v}"


def _check_grid(grid) -> None:
    g = np.asarray(grid, dtype=float)
    if g.size == 0 or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be strictly increasing")


def extract_thresholds(estimates: Sequence[ProbEstimate], delta: float = DEFAULT_DELTA,
                       coupled: bool = True) -> tuple[Threshold, Threshold]:
    """p_c1: first grid p with ci_low > delta.  p_c2: first grid p with
    ci_high > 1 - delta and point >= 1 - 2 delta."""
    grid = [e.p for e in estimates]
    _check_grid(grid)
    pts = np.array([e.point for e in estimates])
    if not coupled and np.any(np.diff(pts) < 0):
        raise ValueError("non-monotone estimates from an uncoupled sweep")

    def first(pred, method):
        for k, e in enumerate(estimates):
            if pred(e):
                return Threshold(e.p, "<" if k == 0 else "=", method)
        return Threshold(grid[-1], ">", method)

    c1 = first(lambda e: e.ci_low > delta, f"ci_low>{delta}")
    c2 = first(lambda e: e.ci_high > 1 - delta and e.point >= 1 - 2 * delta,
               f"ci_high>{1 - delta}")
    return c1, c2


@dataclass
class SweepResult:
    grid: list
    estimates: list
    window_radius: int | None
    p_hat_c1: Threshold
    p_hat_c2: Threshold
    delta: float = DEFAULT_DELTA
    coupled: bool = True
    flags: list = field(default_factory=list)
    critical_values: np.ndarray | None = None

    CSV_COLUMNS = ("p", "trials", "successes", "point", "ci_low", "ci_high")

    def rows(self) -> list[dict]:
        return [{"p": repr(e.p), "trials": e.trials, "successes": e.successes,
                 "point": repr(e.point), "ci_low": repr(e.ci_low), "ci_high": repr(e.ci_high)}
                for e in self.estimates]

    def to_csv(self, extra: dict | None = None) -> str:
        extra = extra or {}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(extra) + list(self.CSV_COLUMNS))
        for r in self.rows():
            w.writerow(list(extra.values()) + [r[c] for c in self.CSV_COLUMNS])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"window_radius": self.window_radius, "delta": self.delta,
                "p_hat_c1": str(self.p_hat_c1), "p_hat_c2": str(self.p_hat_c2),
                "p_hat_c1_method": self.p_hat_c1.method, "p_hat_c2_method": self.p_hat_c2.method,
                "flags": list(self.flags), "grid_points": len(self.grid)}


def _flags(estimates, c1: Threshold, c2: Threshold) -> list[str]:
    out = [f"inconclusive_rate_high@{e.p!r}" for e in estimates if e.flagged]
    if c1.relation == c2.relation == "=":
        e1 = next(e for e in estimates if e.p == c1.value)
        e2 = next(e for e in estimates if e.p == c2.value)
        if e2.ci_low <= e1.ci_high or c1.value == c2.value:
            out.append("p_c1_p_c2_coincide_within_ci")
    return out


def sweep(spec: EventSpec, p_grid: Sequence[float] | None, trials_per_p: int, master_seed: int,
          delta: float = DEFAULT_DELTA, workers: int = 1, zoom: int = 0) -> SweepResult:
    """Coupled sweep; with ``zoom`` > 0 each located threshold is refined by
    that many extra points between it and its left grid neighbour."""
    grid = [float(p) for p in (default_grid() if p_grid is None else p_grid)]
    _check_grid(grid)
    if grid[0] < 0 or grid[-1] > 1:
        raise ValueError("grid must lie in [0, 1]")
    succ, inc, crit = trial_outcomes(spec, grid, trials_per_p, master_seed, workers)
    est = _estimates(grid, succ, inc)
    c1, c2 = extract_thresholds(est, delta)
    if zoom:
        extra = set()
        for t in (c1, c2):
            if t.relation == "=":
                k = grid.index(t.value)
                extra.update(np.linspace(grid[k - 1], grid[k], zoom + 2)[1:-1].tolist())
        extra -= set(grid)
        if extra:
            new = sorted(extra)
            if crit is not None:
                s2 = crit[:, None] < np.asarray(new)[None, :]
                i2 = np.zeros_like(s2)
            else:
                s2, i2, _ = trial_outcomes(spec, new, trials_per_p, master_seed, workers)
            allg = np.array(grid + new)
            order = np.argsort(allg)
            grid = allg[order].tolist()
            succ = np.concatenate([succ, s2], axis=1)[:, order]
            inc = np.concatenate([inc, i2], axis=1)[:, order]
            est = _estimates(grid, succ, inc)
            c1, c2 = extract_thresholds(est, delta)
    return SweepResult(grid, est, window_radius(spec.graph), c1, c2, delta, True,
                       _flags(est, c1, c2), crit)


# ---------------------------------------------------------------- p_c calibration


@dataclass
class PcEstimate:
    family: str
    sizes: list
    crossings: list
    extrapolated: float
    spread: float
    monotone: bool
    trials: int
    seed: int
    curves: dict = field(default_factory=dict, repr=False)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("curves")
        return d


def half_crossing(grid: Sequence[float], points: Sequence[float], level: float = 0.5) -> float:
    """Linear interpolation of the first upward crossing of ``level``; nan if none."""
    pts = np.asarray(points, dtype=float)
    above = np.flatnonzero(pts >= level)
    if above.size == 0:
        return math.nan
    k = int(above[0])
    if k == 0:
        return float(grid[0])
    x0, x1, y0, y1 = grid[k - 1], grid[k], pts[k - 1], pts[k]
    return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))


def _family_thresholds(family: str, sizes: list[int], seeds: np.ndarray) -> np.ndarray:
    kind, _, arg = family.partition(":")
    if kind == "zd":
        return ZdLattice(int(arg)).crossing_thresholds(sizes, seeds)
    if kind == "tree":
        return LazyRegularTree(int(arg), max(sizes)).crossing_thresholds(sizes, seeds)
    if kind == "zd_box":
        d = int(arg)
        cols = []
        for L in sizes:
            g = build_zd_box(d, L)
            spec = EventSpec(g, Vertices(), "spans_boundary")
            cols.append(_critical(spec, spec.h.sample(g), seeds))
        return np.stack(cols, axis=1)
    raise ValueError(f"unknown family {family!r} (use zd:<d>, zd_box:<d> or tree:<d>)")


def _pc_chunk(args):
    family, sizes, master, lo, hi = args
    return _family_thresholds(family, sizes, derive_seeds(master, PERCOLATION, hi - lo, lo))


def critical_samples(family: str, sizes: Sequence[int], trials: int, seed: int,
                     workers: int = 1) -> np.ndarray:
    """(trials, len(sizes)) per-trial crossing values: the smallest p at which
    the origin is joined to the boundary of the size-L window."""
    sizes = sorted(int(s) for s in sizes)
    jobs = [(family, sizes, int(seed), lo, hi) for lo, hi in _chunks(trials, workers)]
    return np.concatenate(_map(_pc_chunk, jobs, workers), axis=0)


def estimate_pc(family: str, sizes: Sequence[int], p_grid: Sequence[float] | None = None,
                trials: int = 2000, seed: int = 0, workers: int = 1) -> PcEstimate:
    """Per size, the 0.5-crossing of P_p(origin cluster reaches the window
    boundary), plus a fit p(L) = p_inf + a / L over the sizes."""
    sizes = sorted(int(s) for s in sizes)
    if len(sizes) < 2:
        raise ValueError("need at least two sizes")
    grid = np.linspace(0.001, 0.999, 999) if p_grid is None else np.asarray(p_grid, float)
    _check_grid(grid)
    crit = critical_samples(family, sizes, trials, seed, workers)
    crossings, curves = [], {}
    for j, L in enumerate(sizes):
        pts = (crit[:, j][:, None] < grid[None, :]).mean(axis=0)
        curves[L] = pts
        crossings.append(half_crossing(grid, pts))
    c = np.asarray(crossings)
    if np.isnan(c).any():
        extrap = math.nan
    else:
        a = np.stack([np.ones(len(sizes)), 1.0 / np.asarray(sizes, float)], axis=1)
        extrap = float(np.linalg.lstsq(a, c, rcond=None)[0][0])
    return PcEstimate(family, sizes, [float(x) for x in c], extrap,
                      float(np.nanmax(c) - np.nanmin(c)) if c.size else math.nan,
                      bool(np.all(np.diff(c) >= 0)), int(trials), int(seed), curves)


# ---------------------------------------------------------------- ball growth


@dataclass
class GrowthResult:
    radii: list
    slope: float
    spread: float
    slopes: np.ndarray = field(repr=False)
    mean_sizes: np.ndarray = field(repr=False)


def ball_sizes(u: Subgraph, center: int, radii: Sequence[int]) -> np.ndarray:
    g = u.parent
    d = bfs_dist(g.indptr, g.nbr, g.nbr_edge, u.edge_mask, u.vertex_mask,
                 np.array([center], dtype=np.int64), int(max(radii)))
    d = d[d >= 0]
    counts = np.bincount(d, minlength=int(max(radii)) + 1).cumsum()
    return counts[np.asarray(radii, dtype=np.int64)]


def _growth_chunk(args):
    spec, p, radii, master, lo, hi = args
    g = spec.graph
    o = int(spec.params.get("center", center_vertex(g)))
    fixed = _fixed_h(spec)
    rows = []
    for i in range(lo, hi):
        h = fixed if fixed is not None else spec.h.sample(g, derive_seed(master, SUBGRAPH, i))
        cfg = from_open_edges(g, uniforms(derive_seed(master, PERCOLATION, i), g.edge_keys) < p)
        rows.append(ball_sizes(enlarge(g, h, cfg), o, radii))
    return np.array(rows, dtype=float).reshape(hi - lo, len(radii))


def growth_exponent(spec: EventSpec, p: float, radii: Sequence[int], trials: int, seed: int,
                    workers: int = 1) -> GrowthResult:
    """Least-squares slope of log|B_U(H)(o, n)| against log n, per trial, then averaged."""
    radii = sorted(int(r) for r in radii)
    if len(radii) < 2 or radii[0] < 1 or len(set(radii)) != len(radii):
        raise ValueError("need at least two distinct positive radii")
    jobs = [(spec, float(p), radii, int(seed), lo, hi) for lo, hi in _chunks(trials, workers)]
    sizes = np.concatenate(_map(_growth_chunk, jobs, workers), axis=0)
    x = np.log(radii)
    slopes = np.array([ols_slope(x, np.log(row)) for row in sizes])
    return GrowthResult(radii, float(slopes.mean()), float(slopes.std(ddof=1)) if trials > 1
                        else 0.0, slopes, sizes.mean(axis=0))


def summary_json(obj: dict, provenance: dict) -> str:
    return json.dumps({**obj, "provenance": provenance}, sort_keys=True, indent=1,
                      default=_json_default)


def _json_default(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(type(x))


__all__ = ["EventSpec", "ProbEstimate", "SweepResult", "Threshold", "PcEstimate",
           "GrowthResult", "estimate_event_prob", "sweep", "extract_thresholds", "estimate_pc",
           "growth_exponent", "critical_samples", "half_crossing", "default_workers",
           "default_grid", "wilson_interval", "trial_outcomes", "get_property"]
