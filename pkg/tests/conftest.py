import itertools
import random

import networkx as nx
import pytest
from hypothesis import strategies as st

from treecover.core_metric import WeightedGraph

ACCEPTANCE_LINES: list[str] = []


def random_connected_graph(rng: random.Random, nmax: int, wmax: int = 10, nmin: int = 2) -> WeightedGraph:
    """Random spanning tree plus up to n extra edges, weights in [0, wmax]."""
    n = rng.randint(nmin, nmax)
    edges = {}
    for v in range(1, n):
        edges[(rng.randrange(v), v)] = rng.randint(0, wmax)
    for _ in range(rng.randint(0, n)):
        u, v = rng.sample(range(n), 2)
        edges[(min(u, v), max(u, v))] = rng.randint(0, wmax)
    return WeightedGraph(n, [(u, v, w) for (u, v), w in edges.items()])


@st.composite
def connected_graphs(draw, nmax=10, wmax=10, nmin=2):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_connected_graph(random.Random(seed), nmax, wmax, nmin)


def to_nx(g: WeightedGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.node_count))
    h.add_weighted_edges_from(g.edges)
    return h


def brute_steiner(g: WeightedGraph, terminals) -> float:
    """Cheapest connected subgraph holding the terminals: min MST over every superset of them."""
    h = to_nx(g)
    terms = set(terminals)
    if len(terms) <= 1:
        return 0
    others = [v for v in range(g.node_count) if v not in terms]
    best = float("inf")
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            sub = h.subgraph(terms | set(extra))
            if nx.is_connected(sub):
                w = sum(d["weight"] for *_, d in nx.minimum_spanning_edges(sub, data=True))
                best = min(best, w)
    return best


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return random.Random(12345)
