"""Experiment specifications, validation and runners.

A spec is a JSON document (schema version 1).  ``validate`` returns a list of
problems; ``run`` refuses any spec with problems and otherwise writes
``<out>/<name>.csv`` and ``<out>/<name>.summary.json``.  Every CSV row starts
with the spec hash, the master seed and the window radius.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import graph as G
from .estimators import (EventSpec, default_grid, estimate_pc, extract_thresholds,
                         growth_exponent, summary_json, sweep, critical_samples, ProbEstimate,
                         SweepResult, window_radius)
from .exact import exact_event_prob
from .lattice import ZdLattice
from .percolation import enlarge, from_open_edges
from .properties import (REGISTRY, cut_points, is_percolating_everywhere, transience_proxy,
                         visit_trend_verdict)
from .recipes import (Backbone, Fixed, PECounterexample, Trace, Vertices, WholeGraph)
from .rng import PERCOLATION, SUBGRAPH, WALK, derive_seed, uniforms

SCHEMA_VERSION = 1


class SpecError(ValueError):
    """The spec is invalid; carries the list of problems."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


# ---------------------------------------------------------------- graph and H recipes

_WINDOW_KEY = {"zd_box": "radius", "regular_tree": "depth", "line_graph": "levels",
               "hybrid_z2_tree": "z2_radius", "glued_trees": "depth"}


def _vertex_estimate(family: str, p: dict) -> int:
    if family == "zd_box":
        return p["d"] * (2 * p["radius"] + 1) ** p["d"]
    if family == "regular_tree":
        return G.regular_tree_size(p["d"], p["depth"])
    if family == "line_graph":
        return 2 * (1 + sum(2 * k**3 for k in range(1, p["levels"])))
    if family == "glued_trees":
        return G.regular_tree_size(p["d1"], p["depth"]) + G.regular_tree_size(p["d2"], p["depth"])
    if family == "hybrid_z2_tree":
        spec = p.get("tree_spec") or G.transient_tree_schedule(p.get("tree_depth", 64))
        size, level = 1, 1
        for b in spec:
            level *= b
            size += level
        return (2 * p["z2_radius"] + 1) ** 2 + size
    if family == "custom":
        return p["n"]
    raise KeyError(family)


_REQUIRED = {"zd_box": ("d", "radius"), "regular_tree": ("d", "depth"),
             "line_graph": ("levels",), "hybrid_z2_tree": ("z2_radius",),
             "glued_trees": ("d1", "d2", "depth"), "custom": ("n", "edges")}


def _graph_problems(rec: dict, budget: int) -> list[str]:
    if not isinstance(rec, dict):
        return ["graph recipe must be an object"]
    fam = rec.get("family")
    if fam not in _REQUIRED:
        return [f"unknown graph family {fam!r}"]
    p = rec.get("params", {})
    out = [f"graph.params.{k} missing" for k in _REQUIRED[fam] if k not in p]
    if out:
        return out
    for k, v in p.items():
        if k in ("edges", "tree_spec", "boundary"):
            continue
        if not isinstance(v, int) or v < 0:
            out.append(f"graph.params.{k} must be a nonnegative integer")
    if out:
        return out
    lows = {"d": 1, "radius": 1, "levels": 1, "z2_radius": 1, "d1": 2, "d2": 2}
    for k, lo in lows.items():
        if k in p and p[k] < lo:
            out.append(f"graph.params.{k} must be >= {lo}")
    if fam == "regular_tree" and p["d"] < 2:
        out.append("graph.params.d must be >= 2 for a tree")
    if not out and _vertex_estimate(fam, p) > budget:
        out.append(f"graph exceeds the budget of {budget} (size ~{_vertex_estimate(fam, p)})")
    return out


def build_graph(rec: dict) -> G.Graph:
    fam, p = rec["family"], rec.get("params", {})
    if fam == "zd_box":
        return G.build_zd_box(p["d"], p["radius"])
    if fam == "regular_tree":
        return G.build_regular_tree(p["d"], p["depth"])
    if fam == "line_graph":
        return G.build_line_graph(p["levels"])
    if fam == "hybrid_z2_tree":
        return G.build_hybrid_z2_tree(p["z2_radius"], p.get("tree_spec"), p.get("tree_depth", 64))
    if fam == "glued_trees":
        return G.build_glued_trees(p["d1"], p["d2"], p["depth"])
    if fam == "custom":
        return G.Graph.from_edges(p["n"], p["edges"], boundary=p.get("boundary", ()),
                                  family="custom", params={"n": p["n"]})
    raise KeyError(fam)


_RECIPES = ("vertices", "whole", "fixed", "trace", "two_sided_trace", "backbone",
            "pe_counterexample")


def build_h(rec: dict):
    kind = rec["recipe"]
    if kind == "vertices":
        return Vertices(tuple(rec.get("ids", ())))
    if kind == "whole":
        return WholeGraph()
    if kind == "fixed":
        return Fixed(tuple(rec["vertices"]), tuple(rec.get("edges", ())))
    if kind == "trace":
        return Trace(rec["steps"], False, rec.get("stop_at_boundary", True))
    if kind == "two_sided_trace":
        return Trace(rec["steps"], True, rec.get("stop_at_boundary", True))
    if kind == "backbone":
        return Backbone()
    if kind == "pe_counterexample":
        return PECounterexample(rec.get("side", 1))
    raise KeyError(kind)


def _h_problems(rec, graph_rec: dict, prop: str | None) -> list[str]:
    if not isinstance(rec, dict) or rec.get("recipe") not in _RECIPES:
        return [f"unknown H recipe {rec.get('recipe') if isinstance(rec, dict) else rec!r}"]
    kind = rec["recipe"]
    out = []
    if kind in ("trace", "two_sided_trace") and not (isinstance(rec.get("steps"), int)
                                                     and rec["steps"] >= 0):
        out.append("h.steps must be a nonnegative integer")
    if kind == "backbone" and graph_rec.get("family") != "line_graph":
        out.append("backbone recipe needs a line_graph")
    if kind == "pe_counterexample" and graph_rec.get("family") not in ("regular_tree",
                                                                        "glued_trees"):
        out.append("pe_counterexample recipe needs a regular_tree or glued_trees graph")
    if prop in REGISTRY and REGISTRY[prop].needs_connected:
        disconnected = ((kind == "vertices" and len(rec.get("ids", ())) > 1)
                        or kind == "pe_counterexample")
        if kind == "fixed" and not out:
            from .properties import is_connected
            try:
                disconnected = not is_connected(build_h(rec).sample(build_graph(graph_rec)))
            except Exception as exc:  # noqa: BLE001 - reported, not raised
                out.append(f"fixed H is invalid: {exc}")
        if disconnected:
            out.append(f"scope violation: property {prop!r} applies to connected subgraphs "
                       f"only, H recipe {kind!r} is disconnected")
    return out


# ---------------------------------------------------------------- validation


def _is_prob(x) -> bool:
    try:
        return 0 <= float(Fraction(str(x))) <= 1
    except (ValueError, ZeroDivisionError):
        return False


def _pos_int(spec: dict, path: str, out: list, allow_zero: bool = False) -> None:
    cur = spec
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            out.append(f"{path} missing")
            return
        cur = cur[part]
    if not isinstance(cur, int) or isinstance(cur, bool) or cur < (0 if allow_zero else 1):
        out.append(f"{path} must be a {'nonnegative' if allow_zero else 'positive'} integer")


def _grid_problems(grid, path: str) -> list[str]:
    if grid is None:
        return []
    if not isinstance(grid, list) or not grid:
        return [f"{path} must be a nonempty list"]
    try:
        vals = [float(x) for x in grid]
    except (TypeError, ValueError):
        return [f"{path} must contain numbers"]
    if any(not 0 < v < 1 for v in vals):
        return [f"{path} must lie in (0, 1)"]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        return [f"{path} must be strictly increasing"]
    return []


def _pc_ref_problems(ref, path: str) -> list[str]:
    if not isinstance(ref, dict):
        return [f"{path} must be an object"]
    out = []
    if not str(ref.get("family", "")).startswith(("zd:", "tree:", "zd_box:")):
        out.append(f"{path}.family must be zd:<d>, zd_box:<d> or tree:<d>")
    sizes = ref.get("sizes")
    if not isinstance(sizes, list) or len(sizes) < 2 or not all(
            isinstance(s, int) and s >= 1 for s in sizes):
        out.append(f"{path}.sizes must list at least two positive integers")
    _pos_int(ref, "trials", out)
    return [o if o.startswith(path) else f"{path}.{o}" for o in out]


def validate(spec) -> list[str]:
    """Static checks; an empty list means ``run`` will accept the spec."""
    if not isinstance(spec, dict):
        return ["spec must be a JSON object"]
    out = []
    if spec.get("schema") != SCHEMA_VERSION:
        out.append(f"schema must be {SCHEMA_VERSION}")
    if not isinstance(spec.get("name"), str) or not spec["name"]:
        out.append("name must be a nonempty string")
    elif not all(c.isalnum() or c in "-_." for c in spec["name"]):
        out.append("name may contain only letters, digits, '-', '_' and '.'")
    if not isinstance(spec.get("seed"), int) or spec["seed"] < 0:
        out.append("seed must be a nonnegative integer")
    budget = spec.get("budget", G.DEFAULT_BUDGET)
    kind = spec.get("kind")
    if kind not in KINDS:
        return out + [f"unknown experiment kind {kind!r}"]
    return out + KINDS[kind].check(spec, budget)


# ---------------------------------------------------------------- helpers


def spec_hash(spec: dict) -> str:
    clean = {k: v for k, v in spec.items() if k != "output"}
    blob = json.dumps(clean, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class Output:
    columns: list
    rows: list
    summary: dict
    window: int | None

    def csv_text(self, h: str, seed: int) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["spec_hash", "seed", "window_radius", "schema"] + list(self.columns))
        win = "" if self.window is None else self.window
        for r in self.rows:
            w.writerow([h, seed, win, SCHEMA_VERSION] + [_fmt(x) for x in r])
        return buf.getvalue()


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (bool, np.bool_)):
        return int(bool(x))
    return x


def _sweep_rows(res: SweepResult) -> list:
    return [[e.p, e.trials, e.successes, e.point, e.ci_low, e.ci_high] for e in res.estimates]


_SWEEP_COLS = ["p", "trials", "successes", "point", "ci_low", "ci_high"]


def reference_pc(ref: dict, workers: int = 1) -> dict:
    """Run the referenced calibration and return its summary."""
    res = estimate_pc(ref["family"], ref["sizes"], None, ref["trials"],
                      ref.get("seed", 0), workers)
    return res.summary()


def _p_of(spec: dict, pspec, workers: int, cache: dict) -> tuple[float, dict | None]:
    """Absolute p, or factor * extrapolated reference p_c."""
    if isinstance(pspec, (int, float)):
        return float(pspec), None
    ref = pspec["reference"]
    key = json.dumps(ref, sort_keys=True)
    if key not in cache:
        cache[key] = reference_pc(ref, workers)
    pc = cache[key]
    return float(pspec["factor"]) * pc["extrapolated"], pc


def _p_problems(pspec, path: str) -> list[str]:
    if isinstance(pspec, (int, float)) and not isinstance(pspec, bool):
        return [] if 0 <= pspec <= 1 else [f"{path} must lie in [0, 1]"]
    if not isinstance(pspec, dict) or "factor" not in pspec or "reference" not in pspec:
        return [f"{path} must be a number or {{factor, reference}}"]
    out = _pc_ref_problems(pspec["reference"], f"{path}.reference")
    if not isinstance(pspec["factor"], (int, float)) or pspec["factor"] <= 0:
        out.append(f"{path}.factor must be positive")
    return out


# ---------------------------------------------------------------- kinds


@dataclass(frozen=True)
class Kind:
    check: Callable
    run: Callable
    summary: str


def _check_sweep(spec, budget):
    out = _graph_problems(spec.get("graph"), budget)
    prop = spec.get("property", {}).get("name")
    if prop not in REGISTRY:
        out.append(f"unknown property {prop!r}")
    if not out:
        out += _h_problems(spec.get("h"), spec["graph"], prop)
    est = spec.get("estimator", {})
    _pos_int(spec, "estimator.trials", out)
    out += _grid_problems(est.get("grid"), "estimator.grid")
    if "delta" in est and not (isinstance(est["delta"], (int, float)) and 0 < est["delta"] < 0.5):
        out.append("estimator.delta must lie in (0, 0.5)")
    if "zoom" in est:
        _pos_int(spec, "estimator.zoom", out, allow_zero=True)
    if prop in ("transient",) and "radii" not in spec.get("property", {}).get("params", {}):
        out.append("property.params.radii required for transient")
    if prop == "recurrent_subset" and "horizons" not in spec.get("property", {}).get("params", {}):
        out.append("property.params.horizons required for recurrent_subset")
    return out


def _run_sweep(spec, workers, cache):
    g = build_graph(spec["graph"])
    est = spec["estimator"]
    ev = EventSpec(g, build_h(spec["h"]), spec["property"]["name"],
                   spec["property"].get("params", {}))
    res = sweep(ev, est.get("grid"), est["trials"], spec["seed"], est.get("delta", 0.01),
                workers, est.get("zoom", 0))
    return Output(_SWEEP_COLS, _sweep_rows(res), res.summary(), res.window_radius)


def _check_lazy_sweep(spec, budget):
    out = []
    fam = str(spec.get("family", ""))
    if not fam.startswith(("tree:", "zd:")):
        out.append("family must be tree:<d> or zd:<d>")
    else:
        try:
            d = int(fam.split(":")[1])
            if fam.startswith("tree:") and d < 3:
                out.append("lazy trees need degree >= 3")
        except ValueError:
            out.append("family degree must be an integer")
    _pos_int(spec, "size", out)
    _pos_int(spec, "estimator.trials", out)
    out += _grid_problems(spec.get("estimator", {}).get("grid"), "estimator.grid")
    return out


def _run_lazy_sweep(spec, workers, cache):
    est = spec["estimator"]
    grid = [float(p) for p in (est.get("grid") or default_grid())]
    crit = critical_samples(spec["family"], [spec["size"]], est["trials"], spec["seed"],
                            workers)[:, 0]
    delta = est.get("delta", 0.01)

    def estimates(points):
        return [ProbEstimate.from_counts(p, crit.size, int(np.sum(crit < p))) for p in points]

    ests = estimates(grid)
    c1, c2 = extract_thresholds(ests, delta)
    zoom = est.get("zoom", 0)
    if zoom:
        extra = set()
        for t in (c1, c2):
            if t.relation == "=":
                k = grid.index(t.value)
                extra.update(np.linspace(grid[k - 1], grid[k], zoom + 2)[1:-1].tolist())
        grid = sorted(set(grid) | extra)
        ests = estimates(grid)
        c1, c2 = extract_thresholds(ests, delta)
    res = SweepResult(grid, ests, spec["size"], c1, c2, delta)
    summ = res.summary()
    summ["median_crossing"] = float(np.median(crit))
    return Output(_SWEEP_COLS, _sweep_rows(res), summ, spec["size"])


def _check_pc(spec, budget):
    out = _pc_ref_problems({"family": spec.get("family"), "sizes": spec.get("sizes"),
                            "trials": spec.get("trials")}, "spec")
    out = [o.replace("spec.", "") for o in out]
    out += _grid_problems(spec.get("grid"), "grid")
    return out


def _run_pc(spec, workers, cache):
    res = estimate_pc(spec["family"], spec["sizes"], spec.get("grid"), spec["trials"],
                      spec["seed"], workers)
    rows = [[L, c] for L, c in zip(res.sizes, res.crossings)]
    return Output(["size", "crossing"], rows, res.summary(), max(res.sizes))


def _check_growth(spec, budget):
    out = _graph_problems(spec.get("graph"), budget)
    if not out:
        out += _h_problems(spec.get("h"), spec["graph"], None)
    out += _p_problems(spec.get("p"), "p")
    radii = spec.get("radii")
    if not isinstance(radii, list) or len(radii) < 2 or not all(
            isinstance(r, int) and r >= 1 for r in radii) or len(set(radii)) != len(radii):
        out.append("radii must list at least two distinct positive integers")
    _pos_int(spec, "trials", out)
    return out


def _run_growth(spec, workers, cache):
    g = build_graph(spec["graph"])
    p, pc = _p_of(spec, spec["p"], workers, cache)
    res = growth_exponent(EventSpec(g, build_h(spec["h"]), "connected"), p, spec["radii"],
                          spec["trials"], spec["seed"], workers)
    rows = [[i, p, s] for i, s in enumerate(res.slopes)]
    summ = {"p": p, "slope_mean": res.slope, "slope_std": res.spread, "radii": res.radii,
            "mean_ball_sizes": res.mean_sizes.tolist(), "reference_pc": pc}
    return Output(["trial", "p_used", "slope"], rows, summ, window_radius(g))


def _check_line(spec, budget):
    out = []
    _pos_int(spec, "levels", out)
    _pos_int(spec, "runs", out)
    _pos_int(spec, "k0", out)
    if not out and _vertex_estimate("line_graph", {"levels": spec["levels"]}) > budget:
        out.append("line graph exceeds the budget")
    if not out and spec["k0"] >= spec["levels"]:
        out.append("k0 must be below levels")
    ps = spec.get("p_values")
    if not isinstance(ps, list) or not ps or not all(_is_prob(p) for p in ps):
        out.append("p_values must be a nonempty list of probabilities")
    radii = spec.get("radii")
    if not isinstance(radii, list) or len(radii) < 2 or any(
            not isinstance(r, int) or r < 1 for r in radii):
        out.append("radii must list at least two positive integers")
    elif not out and 2 * spec["levels"] <= radii[-1] + 1:
        out.append("largest radius must stay inside the line graph (2 * levels > radius + 1)")
    return out


def line_graph_counts(g: G.Graph, open_mask: np.ndarray) -> np.ndarray:
    """Per level k: number of two-edge connections k - m - (k+1) with both edges open."""
    mids = np.flatnonzero(g.labels[:, 0] == 1)
    lvl = g.labels[mids, 1]
    # a midpoint has degree 2, so its two edges sit next to each other in the CSR
    first = g.nbr_edge[g.indptr[mids]]
    second = g.nbr_edge[g.indptr[mids] + 1]
    both = open_mask[first] & open_mask[second]
    return np.bincount(lvl[both], minlength=g.params["levels"])


def _run_line(spec, workers, cache):
    g = build_graph({"family": "line_graph", "params": {"levels": spec["levels"]}})
    h = Backbone().sample(g)
    K, k0, radii = spec["levels"], spec["k0"], spec["radii"]
    ks = np.arange(K)
    rows, summ = [], {"k0": k0, "levels": K, "per_p": {}}
    for p_raw in spec["p_values"]:
        p = float(p_raw)
        ok_count = ok_trans = 0
        all_counts = []
        for r in range(spec["runs"]):
            u = uniforms(derive_seed(spec["seed"], PERCOLATION, r), g.edge_keys)
            cfg = from_open_edges(g, u < p)
            counts = line_graph_counts(g, cfg.open_mask)
            all_counts.append(counts)
            margin = int(np.min(counts[k0:] - ks[k0:] ** 2))
            verdict, prof = transience_proxy(enlarge(g, h, cfg), 0, radii)
            ok_count += margin > 0
            ok_trans += verdict.holds
            rows.append([p, r, margin, int(margin > 0), verdict.verdict,
                         verdict.evidence.get("tail_ratio", math.nan)])
        # pooled over levels >= k0 and runs: a sum of independent binomials
        c = np.array(all_counts, dtype=float)
        n = 2.0 * ks[k0:].astype(float) ** 3 * spec["runs"]
        z = (c[:, k0:].sum() - n.sum() * p * p) / math.sqrt(n.sum() * p * p * (1 - p * p))
        summ["per_p"][repr(p)] = {"count_ok_fraction": ok_count / spec["runs"],
                                  "transient_fraction": ok_trans / spec["runs"],
                                  "binomial_z": float(z),
                                  "mean_count_at_k0": float(c[:, k0].mean()),
                                  "k0_squared": k0 * k0}
    return Output(["p", "run", "min_margin", "count_ok", "transience", "tail_ratio"], rows,
                  summ, K)


def _check_cut(spec, budget):
    out = []
    for k in ("d", "window", "central", "steps_per_side", "runs"):
        _pos_int(spec, k, out)
    if out:
        return out
    if spec["central"] >= spec["window"]:
        out.append("central must be below window")
    if spec["d"] * (2 * spec["window"] + 1) ** spec["d"] > budget:
        out.append("cut-point window exceeds the budget")
    facs = spec.get("p")
    if not isinstance(facs, list) or not facs:
        out.append("p must be a nonempty list")
    else:
        for i, f in enumerate(facs):
            out += _p_problems(f, f"p[{i}]")
    return out


def lattice_trace(lat: ZdLattice, steps: int, seed: int, two_sided: bool = True):
    """Codes and edge keys of a (two-sided) walk trace from the origin."""
    sides = (1, 2) if two_sided else (1,)
    codes, keys = [], []
    for s in sides:
        c, k, _ = lat.walk(steps, derive_seed(seed, WALK, s))
        codes.append(c)
        keys.append(k)
    return np.concatenate(codes), np.concatenate(keys)


def _run_cut(spec, workers, cache):
    d, W, Wc = spec["d"], spec["window"], spec["central"]
    g = G.build_zd_box(d, W)
    lat = ZdLattice(d)
    key_order = np.argsort(g.edge_keys)
    sorted_keys = g.edge_keys[key_order]
    central = np.abs(g.labels).max(axis=1) <= Wc
    ps = [_p_of(spec, f, workers, cache) for f in spec["p"]]
    rows = []
    per_p = {i: [] for i in range(len(ps))}
    for r in range(spec["runs"]):
        codes, keys = lattice_trace(lat, spec["steps_per_side"], derive_seed(spec["seed"],
                                                                              SUBGRAPH, r))
        ids = lat.box_ids(codes, W)
        vm = np.zeros(g.n, dtype=bool)
        vm[ids[ids >= 0]] = True
        j = np.searchsorted(sorted_keys, keys)
        j[j >= sorted_keys.size] = 0
        found = sorted_keys[j] == keys
        em = np.zeros(g.m, dtype=bool)
        em[key_order[j[found]]] = True
        h = G.Subgraph(g, vm, em)
        u = uniforms(derive_seed(spec["seed"], PERCOLATION, r), g.edge_keys)
        for i, (p, _) in enumerate(ps):
            U = enlarge(g, h, from_open_edges(g, u < p))
            n_cut = int(cut_points(U, window_mask=central).size)
            per_p[i].append(n_cut)
            rows.append([i, p, r, n_cut, int(vm.sum()), U.n_vertices])
    summ = {"p_values": [p for p, _ in ps], "reference_pc": [pc for _, pc in ps],
            "fraction_with_cut_point": [float(np.mean(np.array(per_p[i]) > 0)) for i in per_p],
            "fraction_without_cut_point": [float(np.mean(np.array(per_p[i]) == 0))
                                           for i in per_p]}
    return Output(["p_index", "p", "run", "cut_points", "trace_vertices_in_window",
                   "enlarged_vertices"], rows, summ, W)


def _check_rec(spec, budget):
    out = []
    dims = spec.get("dims")
    if not isinstance(dims, list) or not dims or not all(
            isinstance(x, int) and 1 <= x <= 6 for x in dims):
        out.append("dims must list lattice dimensions in 1..6")
    for k in ("trace_steps", "walks"):
        _pos_int(spec, k, out)
    hz = spec.get("horizons")
    if not isinstance(hz, list) or len(hz) < 2 or not all(
            isinstance(x, int) and x >= 1 for x in hz) or sorted(set(hz)) != hz:
        out.append("horizons must be an increasing list of at least two positive integers")
    seeds = spec.get("seeds")
    if not isinstance(seeds, list) or not seeds or not all(
            isinstance(s, int) and s >= 0 for s in seeds):
        out.append("seeds must list nonnegative integers")
    f = spec.get("factor")
    if not isinstance(f, (int, float)) or f <= 0:
        out.append("factor must be positive")
    refs = spec.get("references")
    if not isinstance(refs, dict):
        out.append("references must map each dimension to a calibration spec")
    elif isinstance(dims, list):
        for dd in dims:
            if str(dd) not in refs:
                out.append(f"references.{dd} missing")
            else:
                out += _pc_ref_problems(refs[str(dd)], f"references.{dd}")
    return out


def recurrence_counts(d: int, p: float, trace_steps: int, horizons, walks: int,
                      seed: int) -> np.ndarray:
    """Visits (times 1..n) of an independent walk to U(trace) for each walk
    index and horizon; H and the configuration are redrawn per walk."""
    lat = ZdLattice(d)
    out = np.empty((walks, len(horizons)), dtype=np.int64)
    for w in range(walks):
        codes, keys, _ = lat.walk(trace_steps, derive_seed(seed, SUBGRAPH, w))
        ucodes, _ = lat.enlarge(codes, keys, derive_seed(seed, PERCOLATION, w), p)
        v = lat.visits(horizons, [derive_seed(seed, WALK, w)], ucodes)[0]
        out[w] = v - 1  # the origin lies in the trace
    return out


def _run_rec(spec, workers, cache):
    rows, summ = [], {"per_dim": {}}
    hz = spec["horizons"]
    for d in spec["dims"]:
        p, pc = _p_of(spec, {"factor": spec["factor"], "reference": spec["references"][str(d)]},
                      workers, cache)
        verdicts = []
        for s in spec["seeds"]:
            counts = recurrence_counts(d, p, spec["trace_steps"], hz, spec["walks"],
                                       derive_seed(spec["seed"], d, s))
            v = visit_trend_verdict(hz, counts)
            verdicts.append(v.verdict)
            ev = v.evidence
            rows.append([d, s, p, v.verdict, ev["slope"], ev["ci_low"], ev["ci_high"]]
                        + list(ev["mean_visits"]))
        summ["per_dim"][str(d)] = {"p": p, "reference_pc": pc, "verdicts": verdicts}
    return Output(["d", "seed_index", "p", "verdict", "slope", "ci_low", "ci_high"]
                  + [f"mean_visits_{h}" for h in hz], rows, summ, None)


def _check_pe(spec, budget):
    out = _graph_problems(spec.get("graph"), budget)
    if not out and spec["graph"]["family"] not in ("regular_tree", "glued_trees"):
        out.append("pe_counterexample needs a regular_tree or glued_trees graph")
    ps = spec.get("exact_p")
    if not isinstance(ps, list) or not ps or not all(_is_prob(p) for p in ps):
        out.append("exact_p must list probabilities (fractions allowed, e.g. '1/3')")
    _pos_int(spec, "estimator.trials", out)
    out += _grid_problems(spec.get("estimator", {}).get("grid"), "estimator.grid")
    return out


def _run_pe(spec, workers, cache):
    g = build_graph(spec["graph"])
    rec = PECounterexample(spec.get("side", 1))
    h = rec.sample(g)
    k = g.m - h.n_edges
    rows, exact_ok = [], True
    for p_raw in spec["exact_p"]:
        p = Fraction(str(p_raw))
        res = exact_event_prob(g, h, "connected", p)
        formula = 1 - (1 - p) ** k
        exact_ok &= res.probability == formula
        rows.append(["exact", str(p), str(res.probability), str(formula),
                     int(res.probability == formula), "", "", ""])
    est = spec["estimator"]
    delta = est.get("delta", 0.01)
    res = sweep(EventSpec(g, rec, "connected"), est.get("grid"), est["trials"], spec["seed"],
                delta, workers)
    inside = all(delta < e.point < 1 - delta for e in res.estimates)
    for e in res.estimates:
        rows.append(["sweep", repr(e.p), repr(e.point), repr(1 - (1 - e.p) ** k), "",
                     e.successes, repr(e.ci_low), repr(e.ci_high)])
    summ = {"cut_size": k, "percolating_everywhere": is_percolating_everywhere(g, h),
            "exact_matches_formula": bool(exact_ok), "sweep_strictly_inside": inside,
            **res.summary()}
    return Output(["mode", "p", "value", "formula", "match", "successes", "ci_low", "ci_high"],
                  rows, summ, window_radius(g))


def _check_exact(spec, budget):
    out = _graph_problems(spec.get("graph"), budget)
    prop = spec.get("property", {}).get("name")
    if prop not in REGISTRY:
        out.append(f"unknown property {prop!r}")
    if not out:
        out += _h_problems(spec.get("h"), spec["graph"], prop)
    ps = spec.get("p_values")
    if not isinstance(ps, list) or not ps or not all(_is_prob(p) for p in ps):
        out.append("p_values must list probabilities")
    if "trials" in spec:
        _pos_int(spec, "trials", out)
    if not out:
        g = build_graph(spec["graph"])
        h = build_h(spec["h"]).sample(g)
        if int((~h.edge_mask).sum()) > 24:
            out.append("more than 24 free edges: too many to enumerate")
    return out


def _run_exact(spec, workers, cache):
    from .estimators import estimate_event_prob

    g = build_graph(spec["graph"])
    hrec = build_h(spec["h"])
    h = hrec.sample(g)
    prop = spec["property"]["name"]
    params = spec["property"].get("params", {})
    rows = []
    for p_raw in spec["p_values"]:
        p = Fraction(str(p_raw))
        res = exact_event_prob(g, h, prop, p, params, workers=workers)
        row = [str(p), str(res.probability), repr(float(res.probability))]
        if spec.get("trials"):
            e = estimate_event_prob(EventSpec(g, hrec, prop, params), float(p), spec["trials"],
                                    spec["seed"], workers)
            row += [e.successes, repr(e.point), repr(e.ci_low), repr(e.ci_high)]
        rows.append(row)
    cols = ["p", "exact", "exact_float"]
    if spec.get("trials"):
        cols += ["successes", "point", "ci_low", "ci_high"]
    return Output(cols, rows, {"property": prop,
                               "coefficients": list(res.coefficients)}, window_radius(g))


KINDS = {
    "sweep": Kind(_check_sweep, _run_sweep, "coupled sweep of P_p(U(H) has the property)"),
    "lazy_sweep": Kind(_check_lazy_sweep, _run_lazy_sweep,
                       "coupled spanning sweep on a lazy deep tree or lattice"),
    "estimate_pc": Kind(_check_pc, _run_pc, "0.5-crossings by size and extrapolated p_c"),
    "growth": Kind(_check_growth, _run_growth, "ball-growth exponent of U(H)"),
    "line_graph": Kind(_check_line, _run_line, "per-level connection counts and transience"),
    "cut_points": Kind(_check_cut, _run_cut, "cut points of U(two-sided trace)"),
    "recurrent_subset": Kind(_check_rec, _run_rec, "visit-count trend to U(trace)"),
    "pe_counterexample": Kind(_check_pe, _run_pe, "percolating-everywhere counterexample"),
    "exact": Kind(_check_exact, _run_exact, "exact enumeration (optionally vs Monte Carlo)"),
}


# ---------------------------------------------------------------- run


def apply_overrides(spec: dict, seed: int | None = None, window: int | None = None) -> dict:
    spec = copy.deepcopy(spec)
    if seed is not None:
        spec["seed"] = int(seed)
    if window is not None:
        g = spec.get("graph")
        if isinstance(g, dict) and g.get("family") in _WINDOW_KEY:
            g.setdefault("params", {})[_WINDOW_KEY[g["family"]]] = int(window)
        elif spec.get("kind") == "cut_points":
            spec["window"] = int(window)
        elif spec.get("kind") == "line_graph":
            spec["levels"] = int(window)
        elif spec.get("kind") == "lazy_sweep":
            spec["size"] = int(window)
    return spec


@dataclass
class RunResult:
    csv_path: Path
    summary_path: Path
    output: Output
    spec_hash: str


def run(spec: dict, out_dir: str | Path | None = None, workers: int = 1) -> RunResult:
    problems = validate(spec)
    if problems:
        raise SpecError(problems)
    h = spec_hash(spec)
    out = KINDS[spec["kind"]].run(spec, workers, {})
    target = Path(out_dir if out_dir is not None else spec.get("output", "out"))
    target.mkdir(parents=True, exist_ok=True)
    csv_path = target / f"{spec['name']}.csv"
    sum_path = target / f"{spec['name']}.summary.json"
    csv_path.write_text(out.csv_text(h, spec["seed"]))
    prov = {"spec_hash": h, "seed": spec["seed"], "schema": SCHEMA_VERSION,
            "window_radius": out.window, "name": spec["name"], "kind": spec["kind"]}
    sum_path.write_text(summary_json(out.summary, prov) + "\n")
    return RunResult(csv_path, sum_path, out, h)


def load_spec(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------- catalog


def _pc_ref(d: int, smoke: bool) -> dict:
    if smoke:
        return {"family": f"zd:{d}", "sizes": [4, 6, 8], "trials": 200, "seed": 8}
    sizes = [16, 24, 32] if d == 3 else [6, 8, 10]
    return {"family": f"zd:{d}", "sizes": sizes, "trials": 2000, "seed": 8}


_PE_P = ["1/7", "1/3", "1/2", "2/3", "9/10"]


def catalog(profile: str = "full") -> list[dict]:
    """Built-in experiment specs.  ``smoke`` shrinks every size for quick runs."""
    if profile not in ("full", "smoke"):
        raise ValueError("profile is 'full' or 'smoke'")
    s = profile == "smoke"
    fine = [round(0.01 * k, 2) for k in range(1, 100)]
    entries = [
        {"name": "triangle_exact", "kind": "exact",
         "description": "Triangle with H the two endpoints of one edge: exact connection "
                        "probability by enumeration next to a Monte Carlo estimate.",
         "ops": ["exact_event_prob", "estimate_event_prob"],
         "graph": {"family": "custom", "params": {"n": 3, "edges": [[0, 1], [1, 2], [0, 2]]}},
         "h": {"recipe": "vertices", "ids": [0, 2]},
         "property": {"name": "connected"},
         "p_values": ["1/2"], "trials": 2000 if s else 100000},
    ]
    for d, depth in ((3, 60), (4, 38)):
        entries.append({
            "name": f"tree{d}_sweep", "kind": "lazy_sweep",
            "description": f"Regular tree of degree {d}: coupled sweep of the probability "
                           "that the cluster of the root reaches the window boundary; the "
                           "lower threshold sits near 1/(d-1).",
            "ops": ["LazyRegularTree.crossing_thresholds", "extract_thresholds"],
            "family": f"tree:{d}", "size": 16 if s else depth,
            "estimator": {"grid": fine, "trials": 200 if s else 2000}})
    for d in (3, 5):
        ref = _pc_ref(d, s)
        entries.append({
            "name": f"pc_z{d}", "kind": "estimate_pc",
            "description": f"Calibration of the bond percolation threshold of Z^{d} from "
                           "0.5-crossings in growing windows.",
            "ops": ["estimate_pc", "ZdLattice.crossing_thresholds"],
            "family": ref["family"], "sizes": ref["sizes"], "trials": ref["trials"]})
        entries[-1]["seed"] = ref["seed"]
    entries += [
        {"name": "line_graph_backbone", "kind": "line_graph",
         "description": "Line graph with 2k^3 parallel two-edge links at level k and H the "
                        "backbone: open links outnumber k^2 and U(H) looks transient even "
                        "for small p.",
         "ops": ["build_line_graph", "enlarge", "transience_proxy"],
         "levels": 12 if s else 40, "k0": 6 if s else 20, "runs": 5 if s else 100,
         "p_values": [0.1, 0.2], "radii": [4, 8, 16] if s else [8, 16, 32, 64]},
        {"name": "trace_growth_z3", "kind": "growth",
         "description": "Ball growth of the enlarged random walk trace in Z^3 below p_c: "
                        "the volume exponent stays near two.",
         "ops": ["sample_walk", "enlarge", "growth_exponent"],
         "graph": {"family": "zd_box", "params": {"d": 3, "radius": 10 if s else 48}},
         "h": {"recipe": "trace", "steps": 10**6, "stop_at_boundary": True},
         "p": {"factor": 0.4, "reference": _pc_ref(3, s)},
         "radii": [2, 4, 8] if s else [8, 12, 16, 24, 32, 48], "trials": 4 if s else 50},
        {"name": "cut_points_z5", "kind": "cut_points",
         "description": "Two-sided walk trace in Z^5: its enlargement keeps cut points for "
                        "small p and loses them for large p.",
         "ops": ["ZdLattice.walk", "enlarge", "cut_points"],
         "d": 5, "window": 4 if s else 8, "central": 2 if s else 4,
         "steps_per_side": 500 if s else 10000, "runs": 4 if s else 50,
         "p": [{"factor": 0.25, "reference": _pc_ref(5, s)},
               {"factor": 2.5, "reference": _pc_ref(5, s)}]},
        {"name": "recurrent_subset_z3_z5", "kind": "recurrent_subset",
         "description": "Visits of an independent walk to the enlarged trace: they keep "
                        "accumulating in Z^3 and level off in Z^5.",
         "ops": ["ZdLattice.enlarge", "ZdLattice.visits", "visit_trend_verdict"],
         "dims": [3, 5], "factor": 0.25,
         "references": {"3": _pc_ref(3, s), "5": _pc_ref(5, s)},
         "trace_steps": 2000 if s else 10**5, "walks": 20 if s else 200,
         "horizons": [100, 316, 1000] if s else [1000, 3162, 10000, 31623, 100000],
         "seeds": [0] if s else [0, 1, 2]},
    ]
    for name, graph in (("pe_counterexample_t3",
                         {"family": "regular_tree", "params": {"d": 3, "depth": 4 if s else 7}}),
                        ("pe_counterexample_glued",
                         {"family": "glued_trees",
                          "params": {"d1": 3, "d2": 4, "depth": 3 if s else 5}})):
        entries.append({
            "name": name, "kind": "pe_counterexample",
            "description": "An H that percolates everywhere yet whose enlargement is "
                           "disconnected with probability (1-p)^k for a finite cut of size "
                           "k, so both thresholds degenerate.",
            "ops": ["build_pe_counterexample", "is_percolating_everywhere",
                    "exact_event_prob", "sweep"],
            "graph": graph, "exact_p": _PE_P,
            "estimator": {"grid": [round(0.05 * k, 2) for k in range(1, 16)],
                          "trials": 200 if s else 2000}})
    for i, e in enumerate(entries):
        e.setdefault("seed", 1000 + i)
        e["schema"] = SCHEMA_VERSION
        e["output"] = "out"
    return entries


def catalog_entry(name: str, profile: str = "full") -> dict:
    for e in catalog(profile):
        if e["name"] == name:
            return e
    raise KeyError(f"no catalog entry named {name!r}")
