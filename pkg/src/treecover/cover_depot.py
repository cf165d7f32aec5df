"""Tree cover with depots: distance layers, per-layer splitting, matching rounds.

Nodes are layered by floor(log2 d(v, D)).  Odd and even layers are handled
as two separate instances.  In layer i (scale 2^i) the closure restricted to
the layer is cut at distance 2^i, each component's spanning tree is split
into node-disjoint pieces of weight about 2 * 2^i, and every piece is hooked
to its nearest depot.  The pieces are then handed to depots in rounds of
doubling radius by maximum bipartite matchings; unmatched pieces of the same
depot and class are paired up and move to the next class.  Each depot's final
tree spans the depot and everything assigned to it.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core_metric import (
    INF,
    Cover,
    Infeasible,
    InvalidArgument,
    Tree,
    WeightedGraph,
    closure_forest,
    closure_mst,
    dijkstra,
)
from .decompose import SplitBand, split_tree_disjoint


@dataclass(frozen=True)
class LayerPartition:
    layers: dict[int, frozenset[int]]
    zero_nodes: frozenset[int]


@dataclass(frozen=True)
class RootedTree:
    """A piece hooked to a depot; `tree` contains the depot and its connector."""
    tid: int
    tree: Tree
    depot: int

    @property
    def weight(self) -> int:
        return self.tree.weight


@dataclass
class RootedTreeFamily:
    families: dict[tuple[int, int], list[RootedTree]]
    # depot -> shortest distance from that depot to every reachable node
    depot_dist: dict[int, dict[int, int]]

    def trees(self) -> list[RootedTree]:
        return [t for key in sorted(self.families) for t in self.families[key]]


@dataclass
class AssignmentState:
    round: int
    r: int
    pending: dict[int, list[RootedTree]]
    assigned: dict[int, list[RootedTree]]
    matchings: list[int] = field(default_factory=list)
    # bipartite graph and matching of the latest round, kept for checking
    graph: dict[int, list[int]] = field(default_factory=dict)
    matching: dict[int, int] = field(default_factory=dict)


def _depots(g: WeightedGraph, depots: Iterable[int]) -> list[int]:
    ds = sorted(set(depots))
    if not ds:
        raise InvalidArgument("empty depot set")
    for o in ds:
        if not (0 <= o < g.node_count):
            raise InvalidArgument(f"depot {o} not in graph")
    return ds


def depot_distances(g: WeightedGraph, depots: Sequence[int], adj=None) -> dict[int, dict[int, int]]:
    if adj is None:
        adj = g.adjacency()
    return {o: dijkstra(adj, [o]) for o in depots}


def _nearest(depot_dist: Mapping[int, Mapping[int, int]], v: int) -> tuple[float, int]:
    return min((dd.get(v, INF), o) for o, dd in depot_dist.items())


def layer_nodes(g: WeightedGraph, depots: Iterable[int], depot_dist=None) -> LayerPartition:
    ds = _depots(g, depots)
    if depot_dist is None:
        depot_dist = depot_distances(g, ds)
    dset = set(ds)
    layers: dict[int, set[int]] = {}
    zero = set()
    for v in range(g.node_count):
        if v in dset:
            continue
        d, _ = _nearest(depot_dist, v)
        if d == INF:
            raise Infeasible(f"node {v} cannot reach any depot")
        if d == 0:
            zero.add(v)
        else:
            layers.setdefault(int(d).bit_length() - 1, set()).add(v)
    return LayerPartition({i: frozenset(s) for i, s in sorted(layers.items())}, frozenset(zero))


def _class_of(weight: int) -> int:
    return max(weight, 1).bit_length() - 1


def partition_layers(g: WeightedGraph, lp: LayerPartition, parity: int,
                     depot_dist: Mapping[int, Mapping[int, int]], adj=None,
                     start_id: int = 0) -> RootedTreeFamily:
    """Pieces of every layer with index of the given parity (0 even, 1 odd), hooked to depots."""
    if parity not in (0, 1):
        raise InvalidArgument("parity must be 0 or 1")
    if adj is None:
        adj = g.adjacency()
    families: dict[tuple[int, int], list[RootedTree]] = {}
    tid = start_id
    for i in sorted(lp.layers):
        if i % 2 != parity:
            continue
        scale = 1 << i
        for comp in closure_forest(g, lp.layers[i], max_dist=scale, adj=adj):
            if comp.weight >= 2 * scale:
                pieces = split_tree_disjoint(comp, SplitBand(2 * scale, 6 * scale), adj,
                                             max_edge=scale, merge_residual=True)
            else:
                pieces = [comp]
            for p in pieces:
                d, o, v = min(_nearest(depot_dist, x) + (x,) for x in p.nodes)
                tree = Tree.build(p.nodes | {o}, p.edges + ((min(v, o), max(v, o), d),))
                families.setdefault((_class_of(tree.weight), o), []).append(RootedTree(tid, tree, o))
                tid += 1
    return RootedTreeFamily(dict(sorted(families.items())), dict(depot_dist))


def max_bipartite_matching(left: Sequence[int], adj: Mapping[int, Sequence[int]]) -> dict[int, int]:
    """Maximum-cardinality matching by augmenting paths (one BFS per left vertex)."""
    match_l: dict[int, int] = {}
    match_r: dict[int, int] = {}
    for u in left:
        parent: dict[int, int] = {}
        queue = deque([u])
        end = None
        while queue and end is None:
            x = queue.popleft()
            for y in adj.get(x, ()):
                if y in parent:
                    continue
                parent[y] = x
                if y not in match_r:
                    end = y
                    break
                queue.append(match_r[y])
        if end is None:
            continue
        y = end
        while True:
            x = parent[y]
            prev = match_l.get(x)
            match_l[x] = y
            match_r[y] = x
            if x == u:
                break
            y = prev
    return match_l


def _merge(a: RootedTree, b: RootedTree, tid: int) -> RootedTree:
    # both contain the shared depot, so the union is again a tree
    return RootedTree(tid, Tree.build(a.tree.nodes | b.tree.nodes, a.tree.edges + b.tree.edges), a.depot)


def assign_trees(fam: RootedTreeFamily, depots: Iterable[int],
                 trace: list[AssignmentState] | None = None) -> dict[int, list[RootedTree]]:
    """Hand every piece to a depot in rounds of doubling radius.

    Round i sees the pending class-i pieces.  A piece and a depot are adjacent
    when some node of the piece is within 2^i of the depot.  A maximum matching
    assigns pieces; if a depot's unmatched pile has odd size one piece goes to
    that depot, and the rest are paired (ascending id) into class i+1.
    """
    ds = sorted(set(depots))
    assigned: dict[int, list[RootedTree]] = {o: [] for o in ds}
    incoming: dict[int, dict[int, list[RootedTree]]] = {}
    next_id = 0
    for (cls, o), trees in fam.families.items():
        incoming.setdefault(cls, {}).setdefault(o, []).extend(trees)
        next_id = max([next_id] + [t.tid + 1 for t in trees])
    if not incoming:
        return assigned
    pending: dict[int, list[RootedTree]] = {}
    i = 0
    matchings: list[int] = []
    while pending or any(c >= i for c in incoming):
        for o, trees in incoming.pop(i, {}).items():
            pending.setdefault(o, []).extend(trees)
        if not pending:
            i += 1
            continue
        r = 1 << i
        order = sorted((t for ts in pending.values() for t in ts), key=lambda t: t.tid)
        by_id = {t.tid: t for t in order}
        graph = {}
        for t in order:
            graph[t.tid] = [o for o in ds
                            if min(fam.depot_dist[o].get(x, INF) for x in t.tree.nodes) <= r]
        matching = max_bipartite_matching([t.tid for t in order], graph)
        matchings.append(len(matching))
        for tid, o in matching.items():
            assigned[o].append(by_id[tid])
        nxt: dict[int, list[RootedTree]] = {}
        for o in sorted(pending):
            rest = sorted((t for t in pending[o] if t.tid not in matching), key=lambda t: t.tid)
            if len(rest) % 2 == 1:
                assigned[o].append(rest.pop(0))
            for a, b in zip(rest[0::2], rest[1::2]):
                nxt.setdefault(o, []).append(_merge(a, b, next_id))
                next_id += 1
        if trace is not None:
            trace.append(AssignmentState(i, r, {o: list(ts) for o, ts in pending.items()},
                                         {o: list(ts) for o, ts in assigned.items()},
                                         list(matchings), graph, dict(matching)))
        pending = nxt
        i += 1
    return assigned


def solve_depot(g: WeightedGraph, depots: Iterable[int],
                trace: list[AssignmentState] | None = None) -> Cover:
    ds = _depots(g, depots)
    adj = g.adjacency()
    depot_dist = depot_distances(g, ds, adj)
    lp = layer_nodes(g, ds, depot_dist)
    dset = set(ds)
    owned: dict[int, set[int]] = {o: {o} for o in ds}
    for v in lp.zero_nodes:
        owned[_nearest(depot_dist, v)[1]].add(v)
    start = 0
    for parity in (0, 1):
        fam = partition_layers(g, lp, parity, depot_dist, adj, start_id=start)
        start += sum(len(ts) for ts in fam.families.values())
        for o, trees in assign_trees(fam, ds, trace).items():
            for t in trees:
                owned[o] |= t.tree.nodes - dset
    trees = [closure_mst(g, owned[o], adj=adj) for o in ds]
    return Cover(trees, {idx: o for idx, o in enumerate(ds)})
