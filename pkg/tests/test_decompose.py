import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treecover.core_metric import InvalidArgument, Tree, WeightedGraph, dijkstra
from treecover.decompose import SplitBand, split_evenly, split_tree, split_tree_disjoint


@st.composite
def trees(draw, nmax=30, wmax=6):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = random.Random(seed)
    n = rng.randint(2, nmax)
    top = rng.randint(1, wmax)
    edges = [(rng.randrange(v), v, rng.randint(1, top)) for v in range(1, n)]
    return Tree.build(range(n), edges)


def _connected(t: Tree) -> bool:
    return t.is_spanning_tree()


def _path(n, w=1):
    return Tree.build(range(n + 1), [(i, i + 1, w) for i in range(n)])


def test_path_splits_into_pairs():
    pieces = split_tree(_path(8), SplitBand(2, 4), 1)
    assert sorted(p.weight for p in pieces) == [2, 2, 2, 2]


@pytest.mark.parametrize("R", [1, 3])
def test_star_pairs_edges(R):
    star = Tree.build(range(5), [(0, j, R) for j in range(1, 5)])
    pieces = split_tree(star, SplitBand(2 * R, 4 * R), R)
    assert [p.weight for p in pieces] == [2 * R, 2 * R]


def test_light_tree_unchanged():
    t = _path(1)
    assert split_tree(t, SplitBand(2, 4), 1) == [t]


def test_edge_above_lo_rejected():
    with pytest.raises(InvalidArgument):
        split_tree(_path(3, 5), SplitBand(2, 4), 5)
    with pytest.raises(InvalidArgument):
        SplitBand(3, 2)


def test_split_evenly_cases():
    a, b = split_evenly(_path(4))
    assert max(a.weight, b.weight) == 2 and a.weight + b.weight == 3
    a, b = split_evenly(Tree.build([0, 1], [(0, 1, 5)]))
    assert (a.weight, b.weight) == (0, 0) and a.nodes | b.nodes == {0, 1}
    a, b = split_evenly(Tree.build(range(4), [(0, 1, 1), (0, 2, 1), (0, 3, 1)]))
    assert sorted((a.weight, b.weight)) == [0, 2]


def test_split_evenly_single_node():
    with pytest.raises(InvalidArgument):
        split_evenly(Tree.single(0))


def _band_partitions(t: Tree, lo: int, hi: int):
    """Every edge partition of t into connected pieces with weights in [lo, hi]."""
    edges = list(t.edges)
    for labels in itertools.product(range(3), repeat=len(edges)):
        if labels[0] != 0:
            continue
        groups = {}
        for e, lab in zip(edges, labels):
            groups.setdefault(lab, []).append(e)
        pieces = [Tree.build({x for e in es for x in e[:2]}, es) for es in groups.values()]
        if all(_connected(p) and lo <= p.weight <= hi for p in pieces):
            yield pieces


def test_band_claim_fails_on_three_arm_spider():
    # three arms of weight 9 each, lo 10, hi 2*lo + max_edge = 21
    edges = []
    nxt = 1
    for _ in range(3):
        prev = 0
        for _ in range(3):
            edges.append((prev, nxt, 3))
            prev = nxt
            nxt += 1
    t = Tree.build(range(nxt), edges)
    assert t.weight == 27
    lo, max_edge = 10, 3
    hi = 2 * lo + max_edge
    # no partition into at most three pieces meets the band, so no splitter can
    assert not any(True for _ in _band_partitions(t, lo, hi))
    pieces = split_tree(t, SplitBand(lo, hi), max_edge)
    assert all(p.weight >= lo for p in pieces)


@settings(max_examples=300, deadline=None)
@given(trees(), st.data())
def test_split_tree_partitions_edges(t, data):
    max_edge = max(w for *_, w in t.edges)
    lo = data.draw(st.integers(max_edge, max(max_edge, t.weight)))
    hi = data.draw(st.integers(lo, 4 * lo))
    pieces = split_tree(t, SplitBand(lo, hi), max_edge)
    assert Counter(e for p in pieces for e in p.edges) == Counter(t.edges)
    assert all(_connected(p) for p in pieces)
    if t.weight >= lo:
        assert all(p.weight >= lo for p in pieces)


@settings(max_examples=300, deadline=None)
@given(trees(), st.data())
def test_split_tree_band_when_wide(t, data):
    max_edge = max(w for *_, w in t.edges)
    if t.weight < 2 * max_edge:
        return
    lo = data.draw(st.integers(max_edge, t.weight // 2))
    hi = 2 * lo + max_edge
    pieces = split_tree(t, SplitBand(lo, hi), max_edge)
    without_last = split_tree(t, SplitBand(lo, hi), max_edge, merge_residual=False)
    # every greedy cut lands in the band; only folding the root bag can exceed it
    assert all(lo <= p.weight <= hi for p in without_last if p is not without_last[-1])
    assert all(lo <= p.weight for p in pieces)
    assert all(p.weight <= hi + lo for p in pieces)


@settings(max_examples=300, deadline=None)
@given(trees(), st.data())
def test_split_evenly_is_best_cut(t, data):
    a, b = split_evenly(t)
    assert a.nodes | b.nodes == t.nodes and not (a.nodes & b.nodes)
    assert a.is_spanning_tree() and b.is_spanning_tree()
    best = min(max(w_low, t.weight - w_low - e[2])
               for e in t.edges
               for w_low in [Tree.build(*_side(t, e)).weight])
    assert max(a.weight, b.weight) == best


def _side(t, cut):
    rest = [e for e in t.edges if e != cut]
    side = {cut[0]}
    grow = True
    while grow:
        grow = False
        for u, v, _ in rest:
            if (u in side) != (v in side):
                side |= {u, v}
                grow = True
    return side, [e for e in rest if e[0] in side]


@settings(max_examples=300, deadline=None)
@given(trees(nmax=40), st.data(), st.booleans())
def test_disjoint_split_partitions_nodes(t, data, merge):
    g = WeightedGraph(max(t.nodes) + 1, t.edges)
    adj = g.adjacency()
    max_edge = max(w for *_, w in t.edges)
    lo = data.draw(st.integers(max_edge, max(max_edge, t.weight)))
    hi = data.draw(st.integers(2 * lo - 2 if lo > 1 else lo, 6 * lo))
    hi = max(hi, lo)
    pieces = split_tree_disjoint(t, SplitBand(lo, hi), adj, max_edge, merge_residual=merge)
    seen = Counter(x for p in pieces for x in p.nodes)
    assert set(seen) == set(t.nodes) and max(seen.values()) == 1
    for p in pieces:
        assert p.is_spanning_tree()
        for u, v, w in p.edges:
            assert dijkstra(adj, [u])[v] == w
    if t.weight >= lo:
        assert len(pieces) <= t.weight // lo + 1
        # cut pieces drop their attaching edges, so only an upper bound holds
        cut = pieces if not merge else []
        assert all(p.weight <= hi for p in cut)
