"""Exactly-k tree cover without depots.

A threshold r is searched over prefix graphs (the first j edges in canonical
order) so that the component count, the sum of floor(w / 2r) + 1 with
optional tie relaxation to w / 2r, hits k exactly.  Components of the
accepted prefix graph are cut into node-disjoint subtrees of weight below 4r
and split further until there are k trees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core_metric import (
    Cover,
    Infeasible,
    InvalidArgument,
    Tree,
    UnionFind,
    WeightedGraph,
    edge_key,
    kruskal_forest,
)
from .decompose import SplitBand, split_evenly, split_tree_disjoint


@dataclass(frozen=True)
class ThresholdState:
    j: int
    r: Fraction
    relaxed_components: frozenset[int]


@dataclass(frozen=True)
class CoverParams:
    heuristic_tight_split: bool = False
    post_split_to_k: bool = True


def _term(w: int, r: Fraction) -> int:
    return (w * r.denominator) // (2 * r.numerator) + 1


def _relaxable(w: int, r: Fraction) -> bool:
    return w > 0 and (w * r.denominator) % (2 * r.numerator) == 0


def _counts(weights: Sequence[int], r: Fraction) -> tuple[int, int]:
    """(unrelaxed count, number of components that may be relaxed) at r."""
    total = relax = 0
    for w in weights:
        total += _term(w, r)
        if _relaxable(w, r):
            relax += 1
    return total, relax


def prefix_forest(g: WeightedGraph, j: int) -> list[Tree]:
    """Minimum spanning forest of G_j, one tree per component, by smallest id."""
    return kruskal_forest(range(g.node_count), g.sorted_edges()[:j], presorted=True)


def count_for_threshold(g: WeightedGraph, r, relaxed: frozenset[int] = frozenset(),
                        prefix: int | None = None) -> tuple[int, list[Tree]]:
    """Component count at threshold r.

    Components are those of components_below(g, r) or, when `prefix` is given,
    of G_prefix (whose edges must all be <= r).  Relaxed component ids count
    w / 2r when that is a positive integer.
    """
    r = Fraction(r)
    if r <= 0:
        raise InvalidArgument("threshold must be positive")
    if prefix is None:
        kept = [e for e in g.edges if e[2] <= r]
    else:
        kept = g.sorted_edges()[:prefix]
        if kept and kept[-1][2] > r:
            raise InvalidArgument("prefix graph has edges above the threshold")
    comps = kruskal_forest(range(g.node_count), kept)
    count = 0
    for cid, t in enumerate(comps):
        count += _term(t.weight, r)
        if cid in relaxed and _relaxable(t.weight, r):
            count -= 1
    return count, comps


def _first_hit(weights: list[int], lo, hi: Fraction, k: int):
    """Smallest r in (lo, hi] at which k is reachable for fixed components."""
    if hi <= lo:
        return None
    top, z = _counts(weights, hi)
    if top - z > k:
        return None
    cands = {hi}
    for w in weights:
        if w == 0:
            continue
        l_min = max(1, math.ceil(w / (2 * hi)))
        l_max = k if lo <= 0 else min(k, math.ceil(w / (2 * lo)) - 1)
        for ell in range(l_min, l_max + 1):
            cands.add(Fraction(w, 2 * ell))
    cands = sorted(c for c in cands if lo < c <= hi)
    lo_i, hi_i = 0, len(cands) - 1
    while lo_i < hi_i:
        mid = (lo_i + hi_i) // 2
        c, zc = _counts(weights, cands[mid])
        if c - zc <= k:
            hi_i = mid
        else:
            lo_i = mid + 1
    r = cands[lo_i]
    c, _ = _counts(weights, r)
    return r, c - k


def _relax_ids(uf: UnionFind, n: int, compw: dict[int, int], r: Fraction, need: int) -> frozenset[int]:
    if need <= 0:
        return frozenset()
    roots_by_min: dict[int, int] = {}
    for x in range(n):
        rt = uf.find(x)
        if rt not in roots_by_min:
            roots_by_min[rt] = len(roots_by_min)
    chosen = []
    for rt, cid in roots_by_min.items():
        if _relaxable(compw[rt], r):
            chosen.append(cid)
            if len(chosen) == need:
                break
    assert len(chosen) == need
    return frozenset(chosen)


def find_threshold_exact_k(g: WeightedGraph, k: int) -> ThresholdState:
    n = g.node_count
    if not (1 <= k <= n):
        raise InvalidArgument(f"k={k} outside [1, {n}]")
    edges = g.sorted_edges()
    total = g.total_weight()
    top = Fraction(max(total, 1))
    positive = [e[2] for e in edges if e[2] > 0]
    zero_r = Fraction(positive[0]) if positive else top

    if k == n:
        return ThresholdState(0, zero_r, frozenset())

    uf = UnionFind(range(n))
    compw = {x: 0 for x in range(n)}
    ncomp = n
    prev = Fraction(0)
    j = 0
    i = 0
    while i < len(edges):
        d = edges[i][2]
        b = i
        while b < len(edges) and edges[b][2] == d:
            b += 1
        r = Fraction(d)
        if d > 0:
            hit = _first_hit([compw[x] for x in compw], prev, r, k)
            if hit is not None:
                rr, need = hit
                return ThresholdState(j, rr, _relax_ids(uf, n, compw, rr, need))
            s, z = _counts(list(compw.values()), r)
        for u, v, w in edges[i:b]:
            j += 1
            ru, rv = uf.find(u), uf.find(v)
            if ru == rv:
                continue
            wu, wv = compw.pop(ru), compw.pop(rv)
            uf.union(ru, rv)
            nr = uf.find(ru)
            compw[nr] = wu + wv + w
            ncomp -= 1
            if d == 0:
                if ncomp == k:
                    return ThresholdState(j, zero_r, frozenset())
                continue
            s += _term(compw[nr], r) - _term(wu, r) - _term(wv, r)
            z += _relaxable(compw[nr], r) - _relaxable(wu, r) - _relaxable(wv, r)
            if s - z <= k <= s:
                return ThresholdState(j, r, _relax_ids(uf, n, compw, r, s - k))
        prev = r
        i = b
    hit = _first_hit(list(compw.values()), prev, top, k)
    if hit is not None:
        rr, need = hit
        return ThresholdState(j, rr, _relax_ids(uf, n, compw, rr, need))
    raise Infeasible(f"no threshold gives {k} trees (graph has {ncomp} components)")


def opt_l1(g: WeightedGraph, k: int) -> int:
    """Minimum spanning k-forest weight: Kruskal stopped at k components."""
    n = g.node_count
    if not (1 <= k <= n):
        raise InvalidArgument(f"k={k} outside [1, {n}]")
    uf = UnionFind(range(n))
    comps = n
    total = 0
    for u, v, w in g.sorted_edges():
        if comps == k:
            break
        if uf.union(u, v):
            comps -= 1
            total += w
    if comps > k:
        raise Infeasible(f"graph has more than {k} components")
    return total


def _split_component(comp: Tree, r: Fraction, target: int, tight: bool, adj) -> list[Tree]:
    lo = math.ceil(2 * r)
    hi = math.floor(4 * r)
    max_edge = max(w for _, _, w in comp.edges)
    if tight:
        band = SplitBand(lo, lo + max_edge)
        attempt = split_tree_disjoint(comp, band, adj, max_edge)
        if len(attempt) <= target and all(p.weight <= band.hi for p in attempt):
            return attempt
    band = SplitBand(lo, hi)
    pieces = split_tree_disjoint(comp, band, adj, max_edge)
    if len(pieces) > target:
        # only a weightless root bag can overshoot; folding it in costs nothing
        pieces = split_tree_disjoint(comp, band, adj, max_edge, merge_residual=True)
    return pieces


def _reach_k(trees: list[Tree], k: int, even: bool) -> list[Tree]:
    trees = list(trees)
    while len(trees) < k:
        if even:
            idx = max((i for i, t in enumerate(trees) if len(t.nodes) > 1),
                      key=lambda i: (trees[i].weight, len(trees[i].nodes), -i))
            a, b = split_evenly(trees[idx])
            trees[idx:idx + 1] = [a, b]
        else:
            idx, e = max(((i, e) for i, t in enumerate(trees) for e in t.edges),
                         key=lambda ie: (edge_key(ie[1]), -ie[0]))
            t = trees[idx]
            rest = [f for f in t.edges if f != e]
            trees[idx:idx + 1] = kruskal_forest(t.nodes, rest)
    return trees


def solve_nodepot(g: WeightedGraph, k: int, params: CoverParams = CoverParams()) -> Cover:
    state = find_threshold_exact_k(g, k)
    r = state.r
    adj = g.adjacency()
    trees: list[Tree] = []
    for cid, comp in enumerate(prefix_forest(g, state.j)):
        if comp.weight < 2 * r:
            trees.append(comp)
            continue
        target = _term(comp.weight, r)
        if cid in state.relaxed_components:
            target -= 1
        trees.extend(_split_component(comp, r, target, params.heuristic_tight_split, adj))
    if len(trees) > k:
        raise AssertionError(f"split produced {len(trees)} > {k} trees")
    trees = _reach_k(trees, k, params.post_split_to_k)
    trees.sort(key=lambda t: min(t.nodes))
    return Cover(trees)
