import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_graph, to_nx
from enlargement import graph as G
from enlargement import percolation as P
from enlargement.graph import Graph, GraphError, Subgraph
from enlargement.rng import derive_seed, uniforms


def test_p0_only_forced(triangle):
    cfg = P.sample_config(triangle, 0.0, 7, forced_open=[1])
    assert cfg.open_edges.tolist() == [1]


def test_p1_all_open():
    g = G.build_zd_box(2, 3)
    assert P.sample_config(g, 1.0, 3).open_mask.all()


def test_open_fraction_binomial():
    g = G.build_zd_box(2, 64)
    frac = P.sample_config(g, 0.4, 12345).open_mask.mean()
    se = np.sqrt(0.4 * 0.6 / g.m)
    assert abs(frac - 0.4) < 3 * se


def test_bad_p(triangle):
    with pytest.raises(ValueError):
        P.sample_config(triangle, 1.5, 0)


def test_edge_state_forced_and_coupling():
    g = G.build_zd_box(2, 5)
    lo = P.sample_config(g, 0.2, 99, forced_open=[3])
    hi = lo.at(0.7)
    assert P.edge_state(lo, 3)
    for e in range(g.m):
        if P.edge_state(lo, e):
            assert P.edge_state(hi, e)


@given(st.permutations(list(range(12))))
def test_edge_state_order_free(order):
    g = G.build_zd_box(2, 1)
    cfg = P.sample_config(g, 0.5, 4)
    first = {e: P.edge_state(cfg, e) for e in range(g.m)}
    assert {e: P.edge_state(cfg, e) for e in order} == first
    assert [first[e] for e in range(g.m)] == cfg.open_mask.tolist()


def test_counter_rng_invariant_to_subset():
    """The state of an edge depends only on (seed, key), not on the other keys queried."""
    keys = np.arange(1000, dtype=np.uint64) * 7919
    full = uniforms(11, keys)
    part = uniforms(11, keys[::7])
    assert np.array_equal(full[::7], part)
    assert np.all((full >= 0) & (full < 1))


def test_rng_uniformity():
    u = uniforms(derive_seed(2, 1), np.arange(200000, dtype=np.uint64))
    # Kolmogorov-Smirnov at a comfortable level
    from scipy.stats import kstest

    assert kstest(u, "uniform").pvalue > 1e-4


def test_clusters_examples(triangle):
    c0 = P.clusters(triangle, P.sample_config(triangle, 0, 1))
    assert c0.size[c0.roots].tolist() == [1, 1, 1]
    c1 = P.clusters(triangle, P.sample_config(triangle, 1, 1))
    assert c1.roots.size == 1 and c1.size[c1.roots[0]] == 3
    ab = P.from_open_edges(triangle, [triangle.edge_id(0, 1)])
    lab = P.clusters(triangle, ab)
    assert sorted(map(tuple, (lab.cluster_of(v).tolist() for v in lab.roots))) == [(0, 1), (2,)]


@given(st.integers(2, 14), st.floats(0.1, 0.8), st.floats(0, 1), st.integers(0, 10**6))
def test_clusters_match_networkx(n, prob, p, seed):
    g = random_graph(n, prob, seed)
    cfg = P.sample_config(g, p, seed)
    lab = P.clusters(g, cfg)
    comps = {frozenset(c) for c in nx.connected_components(to_nx(g, cfg.open_mask))}
    mine = {frozenset(lab.cluster_of(int(r)).tolist()) for r in lab.roots}
    assert mine == comps
    for c in comps:
        r = lab.labels[next(iter(c))]
        assert lab.touches_boundary[r] == any(g.boundary[v] for v in c)


def test_open_cluster_examples(triangle):
    c = P.open_cluster(triangle, P.sample_config(triangle, 0, 0), 1)
    assert c.vertices.tolist() == [1] and c.n_edges == 0
    full = P.open_cluster(triangle, P.sample_config(triangle, 1, 0), 1)
    assert full.n_vertices == 3 and full.n_edges == 3
    ab = P.from_open_edges(triangle, [triangle.edge_id(0, 1)])
    c = P.open_cluster(triangle, ab, 0)
    assert c.vertices.tolist() == [0, 1] and c.edges.tolist() == [triangle.edge_id(0, 1)]


def test_enlarge_examples(path3):
    g = G.build_zd_box(2, 4)
    cfg = P.sample_config(g, 0.5, 8)
    x = g.vertex_of((0, 0))
    assert P.enlarge(g, Subgraph.from_ids(g, [x]), cfg) == P.open_cluster(g, cfg, x)
    h = Subgraph.from_ids(g, [x, x + 1], [g.edge_id(x, x + 1)])
    assert P.enlarge(g, h, P.all_closed(g)) == h
    ab = P.from_open_edges(path3, [path3.edge_id(0, 1)])
    u = P.enlarge(path3, Subgraph.from_ids(path3, [0]), ab)
    assert u.vertices.tolist() == [0, 1] and u.edges.tolist() == [path3.edge_id(0, 1)]


def _brute_enlarge(g, h, open_mask):
    """U(H) straight from the definition, via networkx."""
    nxg = to_nx(g, open_mask)
    verts = set(h.vertices.tolist())
    for v in h.vertices.tolist():
        verts |= nx.node_connected_component(nxg, v)
    edges = set(h.edges.tolist())
    edges |= {e for e in np.flatnonzero(open_mask).tolist() if g.edges[e, 0] in verts}
    return verts, edges


def _random_h(g, rng):
    vm = rng.random(g.n) < 0.3
    em = rng.random(g.m) < 0.5
    em &= vm[g.edges[:, 0]] & vm[g.edges[:, 1]]
    return Subgraph(g, vm, em)


@given(st.integers(2, 12), st.floats(0.1, 0.8), st.floats(0, 1), st.integers(0, 10**6))
def test_enlarge_matches_definition(n, prob, p, seed):
    g = random_graph(n, prob, seed)
    h = _random_h(g, np.random.default_rng(seed))
    cfg = P.sample_config(g, p, seed)
    u = P.enlarge(g, h, cfg)
    verts, edges = _brute_enlarge(g, h, cfg.open_mask)
    assert set(u.vertices.tolist()) == verts and set(u.edges.tolist()) == edges
    assert h.issubset(u)
    # monotone in p under the coupling
    assert u.issubset(P.enlarge(g, h, cfg.at(min(1.0, p + 0.2))))


def test_combine_laws():
    g = G.build_zd_box(2, 6)
    w = P.sample_config(g, 0.3, 1)
    assert P.combine(w, P.all_closed(g)) == w
    assert P.combine(w, w) == w


def test_combine_marginal():
    g = G.build_zd_box(2, 40)
    q1, q2 = 0.2, 0.3
    both = P.combine(P.sample_config(g, q1, 1), P.sample_config(g, q2, 2)).open_mask.mean()
    q = q1 + q2 - q1 * q2
    assert abs(both - q) < 4 * np.sqrt(q * (1 - q) / g.m)


def test_combine_other_graph_rejected(triangle, path3):
    with pytest.raises(GraphError):
        P.combine(P.all_closed(triangle), P.all_closed(path3))


def test_spans_boundary_examples():
    g = G.build_zd_box(2, 3)
    corner = int(np.flatnonzero(g.boundary)[0])
    o = g.vertex_of((0, 0))
    closed = P.clusters(g, P.all_closed(g))
    assert P.spans_boundary(g, closed, corner)
    assert not P.spans_boundary(g, closed, o)
    assert P.spans_boundary(g, P.clusters(g, P.sample_config(g, 1, 0)), o)


@pytest.mark.parametrize("lazy", [True, False])
def test_config_round_trip(lazy):
    g = G.build_zd_box(2, 4)
    cfg = P.sample_config(g, 0.35, 77, forced_open=[0, 5])
    if not lazy:
        cfg = cfg.materialize()
    back = P.loads_config(P.dumps_config(cfg), g)
    assert back == cfg and back.mode == cfg.mode


def test_config_rejects_other_graph():
    g = G.build_zd_box(2, 4)
    text = P.dumps_config(P.sample_config(g, 0.5, 1))
    with pytest.raises(GraphError):
        P.loads_config(text, G.build_zd_box(2, 3))
