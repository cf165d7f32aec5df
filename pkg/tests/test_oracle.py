import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_steiner, connected_graphs, random_connected_graph
from treecover.core_metric import CapacityError, Instance, WeightedGraph, steiner_exact
from treecover.cover_depot import solve_depot
from treecover.cover_nodepot import solve_nodepot
from treecover.evaluate import lp_cost, validate
from treecover.instances import gen_partition_gadget
from treecover.oracle import OracleLimit, opt_cover, opt_depot_cover, restricted_growth, subset_steiner_weights


def test_restricted_growth_counts():
    # Bell numbers and partitions into at most two blocks
    assert [sum(1 for _ in restricted_growth(n, n or 1)) for n in range(7)] == [1, 1, 2, 5, 15, 52, 203]
    assert sum(1 for _ in restricted_growth(5, 2)) == 16


def test_all_singletons_cost_nothing():
    g = WeightedGraph(4, [(0, 1, 3), (1, 2, 1), (2, 3, 2)])
    for p in (1, 2, math.inf):
        assert opt_cover(g, 4, p)[0] == 0


def test_partition_gadget_without_depots():
    g = gen_partition_gadget((1, 1, 2)).graph
    value, cover = opt_cover(g, 2, 2)
    assert value == pytest.approx(math.sqrt(8))
    assert sorted(cover.weights()) == [2, 2]


def test_unit_path_minmax():
    g = WeightedGraph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
    assert opt_cover(g, 2, math.inf)[0] == 1


@pytest.mark.parametrize("p", [1, 2, 3, 5, math.inf])
def test_partition_gadget_with_depots(p):
    inst = gen_partition_gadget((1, 1, 2))
    value, cover = opt_depot_cover(inst.graph, inst.depots, p)
    expected = 4 if p == 1 else (2 if p == math.inf else (2 * 2 ** p) ** (1 / p))
    assert value == pytest.approx(expected, rel=1e-12)
    assert cover.depot_of == {0: 0, 1: 1}


def test_all_depots_and_single_depot():
    g = WeightedGraph(4, [(0, 1, 3), (1, 2, 1), (2, 3, 2)])
    assert opt_depot_cover(g, range(4), 2)[0] == 0
    assert opt_depot_cover(g, [1], 1)[0] == 6


def test_limits():
    g = WeightedGraph(9, [(i, i + 1, 1) for i in range(8)])
    with pytest.raises(CapacityError):
        opt_cover(g, 2, 1)
    assert opt_cover(g, 2, 1, OracleLimit(9, 4))[0] == 7
    with pytest.raises(CapacityError):
        opt_cover(WeightedGraph(5, [(i, i + 1, 1) for i in range(4)]), 5, 1)


@settings(max_examples=40, deadline=None)
@given(connected_graphs(nmax=7, wmax=6))
def test_subset_table_matches_brute_force(g):
    table = subset_steiner_weights(g)
    for mask in range(1, 1 << g.node_count):
        terms = [v for v in range(g.node_count) if mask >> v & 1]
        assert table[mask] == brute_steiner(g, terms)


def _brute_cover_value(g, k, p):
    # independent route: every labelling of nodes into k groups, each paid by brute-force Steiner weight
    best = math.inf
    cache = {}
    for labels in itertools.product(range(k), repeat=g.node_count):
        ws = []
        for b in range(k):
            grp = frozenset(v for v, lab in enumerate(labels) if lab == b)
            if grp:
                if grp not in cache:
                    cache[grp] = brute_steiner(g, grp)
                ws.append(cache[grp])
        best = min(best, lp_cost(ws, p))
    return best


@settings(max_examples=25, deadline=None)
@given(connected_graphs(nmax=5, wmax=6), st.data())
def test_oracle_matches_independent_enumeration(g, data):
    k = data.draw(st.integers(1, min(3, g.node_count)))
    for p in (1, 2, math.inf):
        value, cover = opt_cover(g, k, p)
        assert value == pytest.approx(_brute_cover_value(g, k, p), rel=1e-12)
        assert lp_cost(cover, p) == pytest.approx(value, rel=1e-12)
        assert validate(cover, Instance(g, k=k)) == []


@settings(max_examples=60, deadline=None)
@given(connected_graphs(nmax=8), st.data())
def test_oracle_never_above_solvers(g, data):
    k = data.draw(st.integers(1, min(4, g.node_count)))
    depots = data.draw(st.sets(st.integers(0, g.node_count - 1), min_size=1, max_size=4))
    mine = solve_nodepot(g, k)
    ours = solve_depot(g, depots)
    for p in (1, 2, math.inf):
        assert opt_cover(g, k, p)[0] <= lp_cost(mine, p) * (1 + 1e-12)
        value, witness = opt_depot_cover(g, depots, p)
        assert value <= lp_cost(ours, p) * (1 + 1e-12)
        assert validate(witness, Instance(g, depots=tuple(depots))) == []


def test_witness_trees_are_steiner_trees():
    rng = random.Random(3)
    g = random_connected_graph(rng, 7, nmin=7)
    _, cover = opt_cover(g, 3, 1)
    for t in cover.trees:
        assert t.is_spanning_tree() and t.weight == steiner_exact(g, t.nodes).weight
