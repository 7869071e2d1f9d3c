"""Compiled graph kernels over CSR arrays.

CSR layout used throughout: ``indptr`` (n+1), ``nbr`` (2m) neighbour ids and
``nbr_edge`` (2m) the EdgeId of each adjacency entry, neighbours sorted by id.
"""

from __future__ import annotations

import heapq

import numpy as np
from numba import njit

from .rng import nb_uniform


@njit(cache=True)
def bfs_dist(indptr, nbr, nbr_edge, edge_ok, vertex_ok, sources, cutoff):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for s in sources:
        if vertex_ok[s] and dist[s] < 0:
            dist[s] = 0
            queue[tail] = s
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        if cutoff >= 0 and dist[v] >= cutoff:
            continue
        for j in range(indptr[v], indptr[v + 1]):
            w = nbr[j]
            if dist[w] < 0 and edge_ok[nbr_edge[j]] and vertex_ok[w]:
                dist[w] = dist[v] + 1
                queue[tail] = w
                tail += 1
    return dist


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def union_find_labels(n, eu, ev):
    """Component labels (minimum vertex id) via union by size + path halving."""
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for i in range(eu.shape[0]):
        a = _find(parent, eu[i])
        b = _find(parent, ev[i])
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
    root_min = np.full(n, n, dtype=np.int64)
    roots = np.empty(n, dtype=np.int64)
    for v in range(n):
        r = _find(parent, v)
        roots[v] = r
        if v < root_min[r]:
            root_min[r] = v
    labels = np.empty(n, dtype=np.int64)
    for v in range(n):
        labels[v] = root_min[roots[v]]
    return labels


@njit(cache=True)
def prim_critical(indptr, nbr, nbr_edge, edge_keys, forced, seeds, sources, target_mask,
                  need_all, n_targets):
    """Minimax (invasion) search from ``sources`` for each seed.

    Returns, per seed, the smallest p at which the open edges (u_e < p, forced
    edges always open) connect the sources to one target (``need_all`` False)
    or to every target (``need_all`` True).  -1 means already true with forced
    edges only; inf means never.
    """
    n = indptr.shape[0] - 1
    out = np.empty(seeds.shape[0], dtype=np.float64)
    stamp = np.zeros(n, dtype=np.int64)
    for t in range(seeds.shape[0]):
        seed = seeds[t]
        mark = t + 1
        heap = [(-1.0, sources[0])]
        for s in sources[1:]:
            heapq.heappush(heap, (-1.0, s))
        running = -1.0
        hit = 0
        result = np.inf
        while len(heap) > 0:
            w, v = heapq.heappop(heap)
            if stamp[v] == mark:
                continue
            stamp[v] = mark
            if w > running:
                running = w
            if target_mask[v]:
                hit += 1
                if (not need_all) or hit == n_targets:
                    result = running
                    break
            for j in range(indptr[v], indptr[v + 1]):
                x = nbr[j]
                if stamp[x] == mark:
                    continue
                e = nbr_edge[j]
                if forced[e]:
                    heapq.heappush(heap, (-1.0, x))
                else:
                    heapq.heappush(heap, (nb_uniform(seed, edge_keys[e]), x))
        out[t] = result
    return out


@njit(cache=True)
def separating_bridges(indptr, nbr, nbr_edge, edge_ok, vertex_ok, boundary):
    """Flag edges whose removal splits their component into two parts that
    both contain a boundary vertex."""
    n = indptr.shape[0] - 1
    m = edge_ok.shape[0]
    tin = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    sub = np.zeros(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    pedge = np.full(n, -1, dtype=np.int64)
    it = np.zeros(n, dtype=np.int64)
    comp_total = np.zeros(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    flags = np.zeros(m, dtype=np.bool_)
    timer = 0
    norder = 0
    for s in range(n):
        if not vertex_ok[s] or tin[s] >= 0:
            continue
        first = norder
        top = 0
        stack[0] = s
        tin[s] = timer
        low[s] = timer
        timer += 1
        it[s] = indptr[s]
        sub[s] = 1 if boundary[s] else 0
        order[norder] = s
        norder += 1
        while top >= 0:
            v = stack[top]
            if it[v] < indptr[v + 1]:
                j = it[v]
                it[v] += 1
                e = nbr_edge[j]
                w = nbr[j]
                if e == pedge[v] or not edge_ok[e] or not vertex_ok[w]:
                    continue
                if tin[w] < 0:
                    tin[w] = timer
                    low[w] = timer
                    timer += 1
                    parent[w] = v
                    pedge[w] = e
                    it[w] = indptr[w]
                    sub[w] = 1 if boundary[w] else 0
                    order[norder] = w
                    norder += 1
                    top += 1
                    stack[top] = w
                elif tin[w] < low[v]:
                    low[v] = tin[w]
            else:
                top -= 1
                p = parent[v]
                if p >= 0:
                    if low[v] < low[p]:
                        low[p] = low[v]
                    sub[p] += sub[v]
        total = sub[s]
        for k in range(first, norder):
            comp_total[order[k]] = total
    for v in range(n):
        p = parent[v]
        if p < 0:
            continue
        if low[v] > tin[p] and sub[v] > 0 and comp_total[v] - sub[v] > 0:
            flags[pedge[v]] = True
    return flags


@njit(cache=True)
def csr_walk(indptr, nbr, nbr_edge, start, max_steps, seed, boundary, stop_at_boundary):
    """Simple random walk; step t picks neighbour floor(u(seed, t) * deg)."""
    path = np.empty(max_steps + 1, dtype=np.int64)
    used = np.empty(max_steps, dtype=np.int64)
    path[0] = start
    v = start
    length = 0
    reason = 0
    if stop_at_boundary and boundary[v]:
        return path[:1], used[:0], 1
    for t in range(1, max_steps + 1):
        deg = indptr[v + 1] - indptr[v]
        k = int(nb_uniform(seed, np.uint64(t)) * deg)
        j = indptr[v] + k
        used[t - 1] = nbr_edge[j]
        v = nbr[j]
        path[t] = v
        length = t
        if stop_at_boundary and boundary[v]:
            reason = 1
            break
    return path[: length + 1], used[:length], reason


@njit(cache=True)
def csr_visits(indptr, nbr, start, horizon, seeds, weight, boundary, stop_at_boundary):
    """Per walk: sum of ``weight`` over visited positions (time 0 included),
    first and last times with positive weight, and whether the walk stopped on
    the boundary."""
    nw = seeds.shape[0]
    total = np.zeros(nw, dtype=np.float64)
    first = np.full(nw, -1, dtype=np.int64)
    last = np.full(nw, -1, dtype=np.int64)
    exited = np.zeros(nw, dtype=np.bool_)
    for w in range(nw):
        seed = seeds[w]
        v = start
        if weight[v] > 0:
            total[w] += weight[v]
            first[w] = 0
            last[w] = 0
        if stop_at_boundary and boundary[v]:
            exited[w] = True
            continue
        for t in range(1, horizon + 1):
            deg = indptr[v + 1] - indptr[v]
            v = nbr[indptr[v] + int(nb_uniform(seed, np.uint64(t)) * deg)]
            if weight[v] > 0:
                total[w] += weight[v]
                if first[w] < 0:
                    first[w] = t
                last[w] = t
            if stop_at_boundary and boundary[v]:
                exited[w] = True
                break
    return total, first, last, exited


@njit(cache=True)
def csr_visit_histogram(indptr, nbr, start, horizon, seeds, boundary, stop_at_boundary):
    """Visit counts per vertex summed over walks (time 0 included)."""
    n = indptr.shape[0] - 1
    hist = np.zeros(n, dtype=np.float64)
    sq = np.zeros(n, dtype=np.float64)
    own = np.zeros(n, dtype=np.int64)
    touched = np.empty(horizon + 1, dtype=np.int64)
    for w in range(seeds.shape[0]):
        seed = seeds[w]
        v = start
        nt = 0
        touched[nt] = v
        nt += 1
        own[v] += 1
        if not (stop_at_boundary and boundary[v]):
            for t in range(1, horizon + 1):
                deg = indptr[v + 1] - indptr[v]
                v = nbr[indptr[v] + int(nb_uniform(seed, np.uint64(t)) * deg)]
                if own[v] == 0:
                    touched[nt] = v
                    nt += 1
                own[v] += 1
                if stop_at_boundary and boundary[v]:
                    break
        for k in range(nt):
            x = touched[k]
            hist[x] += own[x]
            sq[x] += own[x] * own[x]
            own[x] = 0
    return hist, sq
