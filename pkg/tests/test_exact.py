import itertools
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_graph
from enlargement import graph as G
from enlargement.exact import MAX_FREE_EDGES, exact_event_prob, exact_polynomial, state_counts
from enlargement.graph import Graph, GraphError, Subgraph


def brute_connected_prob(g: Graph, h: Subgraph, p: Fraction) -> Fraction:
    """Enumerate every edge (H edges included) and test U(H) with networkx."""
    total = Fraction(0)
    hv = set(h.vertices.tolist())
    for bits in itertools.product((0, 1), repeat=g.m):
        w = Fraction(1)
        opened = nx.Graph()
        opened.add_nodes_from(range(g.n))
        for e, b in enumerate(bits):
            w *= p if b else 1 - p
            if b:
                opened.add_edge(*map(int, g.edges[e]))
        verts = set(hv)
        for v in hv:
            verts |= nx.node_connected_component(opened, v)
        u = nx.Graph()
        u.add_nodes_from(verts)
        u.add_edges_from(e for e in opened.edges if e[0] in verts)
        u.add_edges_from(tuple(map(int, g.edges[e])) for e in h.edges)
        if nx.is_connected(u):
            total += w
    return total


def test_whole_graph_is_one():
    g = G.build_zd_box(2, 1)
    for p in (Fraction(0), Fraction(1, 3), Fraction(1)):
        assert exact_event_prob(g, Subgraph.full(g), "connected", p).probability == 1


def test_triangle_five_eighths(triangle):
    h = Subgraph.from_ids(triangle, [0, 2])
    r = exact_event_prob(triangle, h, "connected", Fraction(1, 2))
    assert r.probability == Fraction(5, 8)
    assert r.n_configs == 8


def test_triangle_polynomial(triangle):
    h = Subgraph.from_ids(triangle, [0, 2])
    coef = exact_polynomial(triangle, h, "connected")
    assert coef == (0, 1, 1, -1)
    for p in (Fraction(1, 5), Fraction(1, 2), Fraction(7, 9)):
        assert sum(c * p**k for k, c in enumerate(coef)) == brute_connected_prob(triangle, h, p)


def test_single_edge_polynomial():
    g = Graph.from_edges(2, [(0, 1)])
    assert exact_polynomial(g, Subgraph.from_ids(g, [0, 1]), "connected") == (0, 1)


def test_two_classes_three_links():
    edges = [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)]
    g = Graph.from_edges(6, edges)
    inside = [g.edge_id(0, 1), g.edge_id(1, 2), g.edge_id(3, 4), g.edge_id(4, 5)]
    h = Subgraph.from_ids(g, range(6), inside)
    for p in (Fraction(1, 7), Fraction(1, 2), Fraction(5, 6)):
        assert exact_event_prob(g, h, "connected", p).probability == 1 - (1 - p) ** 3


def test_combine_push_forward(triangle):
    """P(U(H) connected under w1 v w2) with w1 ~ P_q1, w2 ~ P_q2 equals the
    polynomial at q1 + q2 - q1 q2, by double enumeration."""
    from enlargement.percolation import combine, enlarge, from_open_edges
    from enlargement.properties import is_connected

    g = triangle
    h = Subgraph.from_ids(g, [0, 2])
    q1, q2 = Fraction(1, 3), Fraction(1, 4)
    total = Fraction(0)
    for b1 in itertools.product((0, 1), repeat=g.m):
        for b2 in itertools.product((0, 1), repeat=g.m):
            w = Fraction(1)
            for x, y in zip(b1, b2):
                w *= (q1 if x else 1 - q1) * (q2 if y else 1 - q2)
            cfg = combine(from_open_edges(g, np.array(b1, bool)),
                          from_open_edges(g, np.array(b2, bool)))
            if is_connected(enlarge(g, h, cfg)):
                total += w
    r = exact_event_prob(g, h, "connected", q1 + q2 - q1 * q2)
    assert r.probability == total


@given(st.integers(2, 7), st.floats(0.2, 0.8), st.integers(0, 10**6),
       st.fractions(0, 1, max_denominator=9))
def test_matches_brute_force(n, prob, seed, p):
    g = random_graph(n, prob, seed)
    if g.m > 10:
        return
    rng = np.random.default_rng(seed)
    vm = rng.random(n) < 0.5
    vm[0] = True
    em = (rng.random(g.m) < 0.4) & vm[g.edges[:, 0]] & vm[g.edges[:, 1]]
    h = Subgraph(g, vm, em)
    r = exact_event_prob(g, h, "connected", p)
    assert r.probability == brute_connected_prob(g, h, p)
    assert r.evaluate(p) == r.probability


def test_worker_invariance():
    g = G.build_zd_box(2, 1)
    h = Subgraph.from_ids(g, [0, 8])
    a, _ = state_counts(g, h, "connected", workers=1)
    b, _ = state_counts(g, h, "connected", workers=3)
    assert np.array_equal(a, b)


def test_forced_edges_are_not_enumerated(triangle):
    h = Subgraph.from_ids(triangle, [0, 2])
    r = exact_event_prob(triangle, h, "connected", Fraction(1, 2),
                         forced_open=[triangle.edge_id(0, 2)])
    assert r.probability == 1 and r.n_configs == 4


def test_too_many_free_edges():
    g = G.build_zd_box(2, 3)
    assert g.m > MAX_FREE_EDGES
    with pytest.raises(GraphError):
        exact_event_prob(g, Subgraph.from_ids(g, [0]), "connected", Fraction(1, 2))


def test_bad_p(triangle):
    with pytest.raises(ValueError):
        exact_event_prob(triangle, Subgraph.from_ids(triangle, [0]), "connected", Fraction(3, 2))
