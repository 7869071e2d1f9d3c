"""Effective resistance with unit conductances."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg, spsolve

from .graph import GraphError, Subgraph, distances

DIRECT_LIMIT = 1000
RESIDUAL_TOL = 1e-9


class Disconnected(GraphError):
    """No target is reachable from the source: the resistance is infinite."""


def _prune_leaves(n: int, eu: np.ndarray, ev: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Drop degree-1 vertices not in ``keep`` repeatedly; they carry no current."""
    alive = np.ones(eu.size, dtype=bool)
    deg = np.bincount(eu, minlength=n) + np.bincount(ev, minlength=n)
    while True:
        leaf = (deg == 1) & ~keep
        if not leaf.any():
            return alive
        hit = alive & (leaf[eu] | leaf[ev])
        alive &= ~hit
        deg = (np.bincount(eu[alive], minlength=n) + np.bincount(ev[alive], minlength=n))


def resistance_between(n: int, eu: np.ndarray, ev: np.ndarray, source: int,
                       ground: np.ndarray) -> float:
    """Resistance from ``source`` to the merged ``ground`` vertices of the
    multigraph (n, eu-ev); every vertex is assumed to share the source's
    component."""
    if ground[source]:
        return 0.0
    keep = ground.copy()
    keep[source] = True
    alive = _prune_leaves(n, eu, ev, keep)
    eu, ev = eu[alive], ev[alive]
    # unknowns: non-ground vertices still carrying edges, plus the source
    used = np.zeros(n, dtype=bool)
    used[eu] = True
    used[ev] = True
    used[source] = True
    unk = used & ~ground
    idx = np.full(n, -1, dtype=np.int64)
    idx[unk] = np.arange(int(unk.sum()))
    k = int(unk.sum())
    # diagonal counts all incident edges, off-diagonal only unknown-unknown pairs
    diag = np.bincount(idx[eu][unk[eu]], minlength=k) + np.bincount(idx[ev][unk[ev]], minlength=k)
    both = unk[eu] & unk[ev]
    iu, iv = idx[eu[both]], idx[ev[both]]
    lap = sp.coo_matrix((np.concatenate([-np.ones(iu.size), -np.ones(iu.size), diag]),
                         (np.concatenate([iu, iv, np.arange(k)]),
                          np.concatenate([iv, iu, np.arange(k)]))), shape=(k, k)).tocsr()
    b = np.zeros(k)
    b[idx[source]] = 1.0
    if k <= DIRECT_LIMIT:
        phi = spsolve(lap.tocsc(), b)
    else:
        phi, _ = cg(lap, b, rtol=1e-13, atol=0.0, maxiter=20 * k)
        if np.linalg.norm(lap @ phi - b) > RESIDUAL_TOL:
            phi = spsolve(lap.tocsc(), b)
    return float(np.atleast_1d(phi)[idx[source]])


def effective_resistance(sub: Subgraph, source: int, targets) -> float:
    """Resistance between ``source`` and the set ``targets`` (shorted together)
    in the network formed by the subgraph's edges."""
    g = sub.parent
    source = g.check_vertex(source)
    if not sub.vertex_mask[source]:
        raise GraphError("source is not a vertex of the subgraph")
    tmask = np.zeros(g.n, dtype=bool)
    tmask[np.asarray(list(targets) if not isinstance(targets, np.ndarray) else targets,
                     dtype=np.int64)] = True
    tmask &= sub.vertex_mask
    comp = distances(g, source, edge_mask=sub.edge_mask, vertex_mask=sub.vertex_mask) >= 0
    if not (tmask & comp).any():
        raise Disconnected("no target reachable from the source")
    e = g.edges[sub.edge_mask]
    e = e[comp[e[:, 0]]]
    return resistance_between(g.n, e[:, 0].copy(), e[:, 1].copy(), source, tmask & comp)


def resistance_profile(sub: Subgraph, center: int, radii) -> np.ndarray:
    """r(n): resistance from ``center`` to the vertices of ``sub`` at intrinsic
    distance > n; ``inf`` where no such vertex is reachable."""
    g = sub.parent
    dist = distances(g, center, edge_mask=sub.edge_mask, vertex_mask=sub.vertex_mask)
    e = g.edges[sub.edge_mask]
    du, dv = dist[e[:, 0]], dist[e[:, 1]]
    out = []
    for n in radii:
        sphere = dist == n + 1
        if not sphere.any():
            out.append(np.inf)
            continue
        # only the ball of radius n+1 matters once its sphere is grounded
        inside = (du >= 0) & (du <= n + 1) & (dv <= n + 1) & (dv >= 0)
        ee = e[inside]
        out.append(resistance_between(g.n, ee[:, 0].copy(), ee[:, 1].copy(), int(center),
                                      sphere))
    return np.asarray(out, dtype=float)
