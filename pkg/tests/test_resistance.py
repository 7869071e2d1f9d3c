import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_graph, to_nx
from enlargement import graph as G
from enlargement.graph import Graph, Subgraph
from enlargement.resistance import Disconnected, effective_resistance, resistance_profile


def dense_resistance(g: Graph, sub: Subgraph, s: int, targets) -> float:
    """Oracle: short the targets into one node, then use the Laplacian pseudo-inverse."""
    targets = set(int(t) for t in targets)
    t0 = min(targets)
    rename = {v: (t0 if v in targets else v) for v in range(g.n)}
    m = nx.MultiGraph()
    comp = nx.node_connected_component(to_nx(g, sub.edge_mask, sub.vertex_mask), s)
    m.add_nodes_from(rename[v] for v in comp)
    for e in np.flatnonzero(sub.edge_mask):
        u, v = (rename[int(x)] for x in g.edges[e])
        if u in m and v in m and u != v:
            m.add_edge(u, v)
    nodes = sorted(m.nodes)
    pos = {v: i for i, v in enumerate(nodes)}
    lap = np.zeros((len(nodes), len(nodes)))
    for u, v in m.edges():
        i, j = pos[u], pos[v]
        lap[i, i] += 1
        lap[j, j] += 1
        lap[i, j] -= 1
        lap[j, i] -= 1
    pinv = np.linalg.pinv(lap)
    i, j = pos[s], pos[t0]
    return float(pinv[i, i] + pinv[j, j] - 2 * pinv[i, j])


def test_series():
    for n in (1, 2, 7, 30):
        g = Graph.from_edges(n + 1, [(k, k + 1) for k in range(n)])
        assert effective_resistance(Subgraph.full(g), 0, [n]) == pytest.approx(n, abs=1e-12)


def test_parallel_paths():
    g = Graph.from_edges(4, [(0, 1), (1, 3), (0, 2), (2, 3)])
    assert effective_resistance(Subgraph.full(g), 0, [3]) == pytest.approx(1.0, abs=1e-12)


def test_four_cycle_adjacent():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert effective_resistance(Subgraph.full(g), 0, [1]) == pytest.approx(0.75, abs=1e-12)


def test_disconnected():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(Disconnected):
        effective_resistance(Subgraph.full(g), 0, [3])


@given(st.integers(3, 12), st.floats(0.2, 0.9), st.integers(0, 10**6))
def test_matches_pseudo_inverse(n, prob, seed):
    g = random_graph(n, prob, seed)
    rng = np.random.default_rng(seed)
    s = 0
    comp = nx.node_connected_component(to_nx(g), s)
    others = sorted(comp - {s})
    if not others:
        return
    targets = rng.choice(others, size=min(len(others), int(rng.integers(1, 4))), replace=False)
    sub = Subgraph.full(g)
    got = effective_resistance(sub, s, targets)
    assert got == pytest.approx(dense_resistance(g, sub, s, targets), rel=1e-9, abs=1e-12)


def test_large_network_uses_iterative_path():
    g = G.build_zd_box(2, 30)
    o = g.vertex_of((0, 0))
    sub = Subgraph.full(g)
    r = effective_resistance(sub, o, np.flatnonzero(g.boundary))
    # symmetric Z^2 box: resistance ~ log(R) / (2 pi) + const, well inside (0.4, 1)
    assert 0.4 < r < 1.0
    small = effective_resistance(sub, o, [g.vertex_of((1, 0))])
    assert small == pytest.approx(0.5, abs=0.02)  # infinite-lattice value is 1/2


def test_profile_tree_bounded_and_path_linear():
    t = G.build_regular_tree(3, 10)
    r = resistance_profile(Subgraph.full(t), 0, [1, 2, 4, 8])
    # root has 3 children then binary branching: r(n) = (1/3) sum_{k<=n} 2^-k... bounded by 2/3
    assert np.all(np.diff(r) > 0) and r[-1] < 2 / 3
    p = G.build_zd_box(1, 40)
    o = p.vertex_of((0,))
    r = resistance_profile(Subgraph.full(p), o, [1, 5, 20])
    assert np.allclose(r, np.array([2, 6, 21]) / 2)


def test_profile_empty_sphere_is_inf():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    r = resistance_profile(Subgraph.full(g), 0, [1, 2])
    assert r[0] == 2.0 and np.isinf(r[1])
