"""Exact optima for tiny instances by exhaustive enumeration.

A cover with possibly overlapping trees is the same as a partition of the
nodes into responsibility groups, each paid for by its minimum Steiner tree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator

from .core_metric import (
    INF,
    CapacityError,
    Cover,
    Infeasible,
    InvalidArgument,
    WeightedGraph,
    dijkstra,
    steiner_exact,
)
from .evaluate import lp_norm


@dataclass(frozen=True)
class OracleLimit:
    max_nodes: int = 8
    max_k: int = 4


LIMIT = OracleLimit()


def restricted_growth(n: int, max_blocks: int) -> Iterator[list[int]]:
    """Set partitions of range(n) into at most max_blocks blocks, as block labels."""
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield list(a)
            return
        for b in range(min(used + 1, max_blocks)):
            a[i] = b
            yield from rec(i + 1, max(used, b + 1))

    yield from rec(1, 1)


def subset_steiner_weights(g: WeightedGraph) -> list[float]:
    """Minimum Steiner tree weight of every node subset, indexed by bitmask.

    One Dreyfus-Wagner pass with every node as a terminal: best[mask][v] is
    the cheapest tree spanning mask plus v.
    """
    n = g.node_count
    adj = g.adjacency()
    dist = []
    for s in range(n):
        d = dijkstra(adj, [s])
        dist.append([d.get(t, INF) for t in range(n)])
    full = 1 << n
    best = [[INF] * n for _ in range(full)]
    for i in range(n):
        best[1 << i] = list(dist[i])
    for mask in range(1, full):
        if mask & (mask - 1) == 0:
            continue
        row = best[mask]
        sub = (mask - 1) & mask
        while sub:
            other = mask ^ sub
            if sub < other:
                a, b = best[sub], best[other]
                for v in range(n):
                    c = a[v] + b[v]
                    if c < row[v]:
                        row[v] = c
            sub = (sub - 1) & mask
        base = list(row)
        for v in range(n):
            dv = dist[v]
            row[v] = min(base[u] + dv[u] for u in range(n))
    out = [0.0] * full
    for mask in range(1, full):
        v = (mask & -mask).bit_length() - 1
        out[mask] = best[mask][v]
    return out


class _Costs:
    def __init__(self, g: WeightedGraph):
        self.g = g
        self.table = _weight_table(g)

    def weight(self, group: Iterable[int]):
        mask = 0
        for v in group:
            mask |= 1 << v
        return self.table[mask]


@lru_cache(maxsize=64)
def _weight_table(g: WeightedGraph) -> tuple:
    return tuple(subset_steiner_weights(g))


def _key(weights: list[int], p: float):
    # exact comparison for p in {1, inf}
    if p == math.inf:
        return max(weights, default=0)
    if p == 1:
        return sum(weights)
    return lp_norm(weights, p)


def _check(g: WeightedGraph, limit: OracleLimit):
    if g.node_count > limit.max_nodes:
        raise CapacityError(f"{g.node_count} nodes exceeds oracle limit {limit.max_nodes}")


def _p(p) -> float:
    if isinstance(p, str):
        p = math.inf if p.lower() in ("inf", "infinity") else float(p)
    if not (p >= 1):
        raise InvalidArgument(f"p must be >= 1, got {p}")
    return p


def opt_cover(g: WeightedGraph, k: int, p, limit: OracleLimit = LIMIT) -> tuple[float, Cover]:
    """Minimum l_p value over covers by at most k trees."""
    _check(g, limit)
    if k > limit.max_k:
        raise CapacityError(f"k={k} exceeds oracle limit {limit.max_k}")
    if not (1 <= k <= max(g.node_count, 1)):
        raise InvalidArgument(f"k={k} outside [1, {g.node_count}]")
    p = _p(p)
    costs = _Costs(g)
    best = None
    for labels in restricted_growth(g.node_count, k):
        groups: dict[int, list[int]] = {}
        for v, b in enumerate(labels):
            groups.setdefault(b, []).append(v)
        parts = [grp for _, grp in sorted(groups.items())]
        ws = [costs.weight(grp) for grp in parts]
        if INF in ws:
            continue
        key = _key(ws, p)
        if best is None or key < best[0]:
            best = (key, parts, ws)
    if best is None:
        raise Infeasible(f"no cover with {k} trees")
    trees = [steiner_exact(g, grp) for grp in best[1]]
    return lp_norm(best[2], p), Cover(trees)


def opt_depot_cover(g: WeightedGraph, depots: Iterable[int], p,
                    limit: OracleLimit = LIMIT) -> tuple[float, Cover]:
    """Minimum l_p value over covers with one tree per depot."""
    _check(g, limit)
    ds = sorted(set(depots))
    if not ds:
        raise InvalidArgument("empty depot set")
    p = _p(p)
    others = [v for v in range(g.node_count) if v not in set(ds)]
    costs = _Costs(g)
    best = None
    for choice in product(range(len(ds)), repeat=len(others)):
        groups = [[o] for o in ds]
        for v, c in zip(others, choice):
            groups[c].append(v)
        ws = [costs.weight(grp) for grp in groups]
        if INF in ws:
            continue
        key = _key(ws, p)
        if best is None or key < best[0]:
            best = (key, groups, ws)
    if best is None:
        raise Infeasible("no depot cover exists")
    trees = [steiner_exact(g, grp) for grp in best[1]]
    return lp_norm(best[2], p), Cover(trees, {i: o for i, o in enumerate(ds)})
