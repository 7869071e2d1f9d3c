"""Exact P_p(U(H) has the property) by enumerating configurations.

Only edges outside E(H) (and not forced open) are enumerated: the enlargement
contains every H edge whatever its state, so H edges do not affect U(H).
Verdicts come from the same checkers as the Monte Carlo path.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .graph import Graph, GraphError, Subgraph
from .percolation import enlarge, from_open_edges
from .properties import check_property

MAX_FREE_EDGES = 24


@dataclass(frozen=True)
class ExactResult:
    probability: Fraction | None
    property: str
    p: Fraction | None
    n_configs: int
    counts: tuple
    coefficients: tuple

    @property
    def value(self) -> float | None:
        return None if self.probability is None else float(self.probability)

    def evaluate(self, p) -> Fraction:
        p = as_fraction(p)
        return sum((c * p**k for k, c in enumerate(self.coefficients)), Fraction(0))

    def to_record(self) -> str:
        return "\t".join(["exact", self.property, str(self.p), str(self.probability),
                          f"{self.value!r}", str(self.n_configs),
                          " ".join(map(str, self.coefficients))])


def as_fraction(p) -> Fraction:
    f = p if isinstance(p, Fraction) else Fraction(p)
    if not 0 <= f <= 1:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return f


def _free_edges(g: Graph, h: Subgraph, forced: np.ndarray) -> np.ndarray:
    free = np.flatnonzero(~h.edge_mask & ~forced)
    if free.size > MAX_FREE_EDGES:
        raise GraphError(f"{free.size} free edges exceed the enumeration limit {MAX_FREE_EDGES}")
    return free


def _count_range(args) -> np.ndarray:
    g, h, prop, params, forced, free, lo, hi = args
    base = h.edge_mask | forced
    counts = np.zeros(free.size + 1, dtype=np.int64)
    bits = np.zeros(g.m, dtype=bool)
    shifts = np.arange(free.size)
    for code in range(lo, hi):
        on = ((code >> shifts) & 1).astype(bool)
        bits[:] = base
        bits[free[on]] = True
        cfg = from_open_edges(g, bits)
        u = enlarge(g, h, cfg)
        if check_property(prop, u, h, params).holds:
            counts[int(on.sum())] += 1
    return counts


def state_counts(g: Graph, h: Subgraph, prop: str, params: dict | None = None,
                 forced_open: Iterable[int] = (), workers: int = 1) -> tuple[np.ndarray, int]:
    """N_k: configurations of the free edges with k open edges where the property holds."""
    if h.parent is not g:
        raise GraphError("h is not a subgraph of g")
    forced = np.zeros(g.m, dtype=bool)
    forced[np.fromiter((int(e) for e in forced_open), dtype=np.int64)] = True
    free = _free_edges(g, h, forced)
    total = 1 << free.size
    n_chunks = max(1, min(int(workers), total))
    bounds = np.linspace(0, total, n_chunks + 1).astype(np.int64)
    jobs = [(g, h, prop, params or {}, forced, free, int(a), int(b))
            for a, b in zip(bounds[:-1], bounds[1:])]
    if n_chunks == 1:
        parts = [_count_range(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=n_chunks) as ex:
            parts = list(ex.map(_count_range, jobs))
    return np.sum(parts, axis=0), free.size


def _expand(counts: np.ndarray, m: int) -> tuple:
    """Power-basis coefficients of sum_k N_k p^k (1-p)^(m-k)."""
    coef = [0] * (m + 1)
    for k, nk in enumerate(counts.tolist()):
        if nk == 0:
            continue
        for j in range(m - k + 1):
            coef[k + j] += nk * math.comb(m - k, j) * (-1) ** j
    return tuple(coef)


def exact_polynomial(g: Graph, h: Subgraph, prop: str, params: dict | None = None,
                     forced_open: Iterable[int] = (), workers: int = 1) -> tuple:
    counts, m = state_counts(g, h, prop, params, forced_open, workers)
    return _expand(counts, m)


def exact_event_prob(g: Graph, h: Subgraph, prop: str, p, params: dict | None = None,
                     forced_open: Iterable[int] = (), workers: int = 1) -> ExactResult:
    pf = as_fraction(p)
    counts, m = state_counts(g, h, prop, params, forced_open, workers)
    prob = sum((Fraction(int(nk)) * pf**k * (1 - pf) ** (m - k)
                for k, nk in enumerate(counts.tolist())), Fraction(0))
    return ExactResult(prob, prop, pf, 1 << m, tuple(int(c) for c in counts), _expand(counts, m))
