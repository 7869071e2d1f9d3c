import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from enlargement.graph import Graph

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def to_nx(g: Graph, edge_mask=None, vertex_mask=None) -> nx.Graph:
    """networkx copy, optionally restricted to a subgraph."""
    out = nx.Graph()
    vs = range(g.n) if vertex_mask is None else np.flatnonzero(vertex_mask)
    out.add_nodes_from(int(v) for v in vs)
    es = range(g.m) if edge_mask is None else np.flatnonzero(edge_mask)
    out.add_edges_from((int(g.edges[e, 0]), int(g.edges[e, 1])) for e in es)
    return out


def random_graph(n: int, prob: float, seed: int, boundary_frac: float = 0.3) -> Graph:
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < prob]
    boundary = np.flatnonzero(rng.random(n) < boundary_frac)
    return Graph.from_edges(n, pairs, boundary=boundary)


@pytest.fixture
def triangle() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path3() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2)], boundary=[0, 2])


# ---- acceptance report

ACCEPTANCE_LINES: dict[str, str] = {}


def report(criterion: str, ok: bool, detail: str) -> None:
    line = f"{criterion} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        key = lambda c: int(c[1:])  # noqa: E731
        for c in sorted(ACCEPTANCE_LINES, key=key):
            terminalreporter.write_line(ACCEPTANCE_LINES[c])
