"""Graphs, shortest-path closures, spanning trees and exact Steiner trees."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

# Distance between disconnected nodes.  Compares greater than every integer.
INF = math.inf

STEINER_MAX_TERMINALS = 12

Edge = tuple[int, int, int]


class InvalidArgument(ValueError):
    pass


class Infeasible(Exception):
    pass


class CapacityError(Exception):
    pass


def edge_key(e: Edge) -> tuple[int, int, int]:
    """Canonical tie-breaking order for edges: (w, min-id, max-id)."""
    u, v, w = e
    return (w, min(u, v), max(u, v))


def _norm(u: int, v: int, w: int) -> Edge:
    return (u, v, w) if u < v else (v, u, w)


@dataclass(frozen=True)
class WeightedGraph:
    node_count: int
    edges: tuple[Edge, ...]

    def __init__(self, node_count: int, edges: Iterable[Sequence[int]] = ()):
        if node_count < 0:
            raise InvalidArgument("node_count must be non-negative")
        seen = set()
        normed = []
        for e in edges:
            u, v, w = (int(x) for x in e)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise InvalidArgument(f"edge ({u},{v}) has an id outside [0,{node_count})")
            if u == v:
                raise InvalidArgument(f"self-loop at {u}")
            if w < 0:
                raise InvalidArgument(f"negative weight on ({u},{v})")
            e2 = _norm(u, v, w)
            if (e2[0], e2[1]) in seen:
                raise InvalidArgument(f"duplicate edge ({e2[0]},{e2[1]})")
            seen.add((e2[0], e2[1]))
            normed.append(e2)
        object.__setattr__(self, "node_count", node_count)
        object.__setattr__(self, "edges", tuple(normed))

    def adjacency(self) -> list[list[tuple[int, int]]]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    def total_weight(self) -> int:
        return sum(w for _, _, w in self.edges)

    def sorted_edges(self) -> list[Edge]:
        cached = self.__dict__.get("_sorted_cache")
        if cached is None:
            cached = tuple(sorted(self.edges, key=lambda e: (e[2], e[0], e[1])))
            object.__setattr__(self, "_sorted_cache", cached)
        return list(cached)


@dataclass(frozen=True)
class DistanceMatrix:
    ids: tuple[int, ...]
    dist: tuple[tuple[float, ...], ...]

    def index(self, node: int) -> int:
        return self._pos[node]

    def d(self, u: int, v: int):
        return self.dist[self._pos[u]][self._pos[v]]

    @property
    def _pos(self) -> dict[int, int]:
        pos = self.__dict__.get("_pos_cache")
        if pos is None:
            pos = {x: i for i, x in enumerate(self.ids)}
            object.__setattr__(self, "_pos_cache", pos)
        return pos


@dataclass(frozen=True)
class Tree:
    nodes: frozenset[int]
    edges: tuple[Edge, ...]
    weight: int

    @staticmethod
    def build(nodes: Iterable[int], edges: Iterable[Sequence[int]] = ()) -> "Tree":
        es = tuple(sorted((_norm(int(u), int(v), int(w)) for u, v, w in edges), key=edge_key))
        return Tree(frozenset(nodes), es, sum(w for _, _, w in es))

    @staticmethod
    def single(node: int) -> "Tree":
        return Tree(frozenset((node,)), (), 0)

    def is_spanning_tree(self) -> bool:
        if not self.nodes:
            return False
        if len(self.edges) != len(self.nodes) - 1:
            return False
        if self.weight != sum(w for _, _, w in self.edges):
            return False
        uf = UnionFind(self.nodes)
        for u, v, _ in self.edges:
            if u not in self.nodes or v not in self.nodes:
                return False
            if not uf.union(u, v):
                return False
        return True


@dataclass
class Cover:
    trees: list[Tree]
    depot_of: dict[int, int] | None = field(default=None)

    def weights(self) -> list[int]:
        return [t.weight for t in self.trees]


@dataclass(frozen=True)
class Instance:
    """A graph plus either a target tree count k or a depot set."""
    graph: WeightedGraph
    k: int | None = None
    depots: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.k is None) == (self.depots is None):
            raise InvalidArgument("an instance needs exactly one of k and depots")
        if self.depots is not None:
            object.__setattr__(self, "depots", tuple(sorted(set(self.depots))))
            for o in self.depots:
                if not (0 <= o < self.graph.node_count):
                    raise InvalidArgument(f"depot {o} not in graph")


class UnionFind:
    """Disjoint sets over arbitrary hashable ids, path halving + union by size."""

    def __init__(self, items: Iterable[int] = ()):
        self.parent: dict[int, int] = {}
        self.size: dict[int, int] = {}
        for x in items:
            self.parent[x] = x
            self.size[x] = 1

    def add(self, x: int) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def dijkstra(adj: Sequence[Sequence[tuple[int, int]]], sources: Iterable[int],
             cutoff: float = INF) -> dict[int, int]:
    """Shortest distances from the nearest source; nodes beyond `cutoff` are omitted."""
    dist: dict[int, int] = {}
    heap = [(0, s) for s in sorted(set(sources))]
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if u in dist:
            continue
        dist[u] = d
        for v, w in adj[u]:
            nd = d + w
            if v not in dist and nd <= cutoff:
                heapq.heappush(heap, (nd, v))
    return dist


def voronoi(adj: Sequence[Sequence[tuple[int, int]]], sources: Iterable[int],
            cutoff: float = INF) -> tuple[dict[int, int], dict[int, int]]:
    """Distance to and identity of a nearest source.

    Every source labels itself and other nodes inherit the label of the path
    that reaches them first, ties going to the smaller source id.
    """
    srcs = sorted(set(sources))
    dist: dict[int, int] = {}
    label: dict[int, int] = {}
    heap = [(0, s, s) for s in srcs]
    for s in srcs:
        dist[s] = 0
        label[s] = s
    done: set[int] = set()
    fixed = set(srcs)
    while heap:
        d, src, u = heapq.heappop(heap)
        if u in done or label[u] != src or dist[u] != d:
            continue
        done.add(u)
        for v, w in adj[u]:
            nd = d + w
            if v in done or v in fixed or nd > cutoff:
                continue
            if v not in dist or (nd, src) < (dist[v], label[v]):
                dist[v] = nd
                label[v] = src
                heapq.heappush(heap, (nd, src, v))
    return dist, label


def _check_ids(g: WeightedGraph, ids: Iterable[int]) -> list[int]:
    out = sorted(set(ids))
    for x in out:
        if not (0 <= x < g.node_count):
            raise InvalidArgument(f"node id {x} not in graph")
    return out


def metric_closure(g: WeightedGraph, subset: Iterable[int]) -> DistanceMatrix:
    ids = _check_ids(g, subset)
    if not ids:
        raise InvalidArgument("metric closure over an empty subset")
    adj = g.adjacency()
    rows = []
    for s in ids:
        d = dijkstra(adj, [s])
        rows.append(tuple(d.get(t, INF) for t in ids))
    return DistanceMatrix(tuple(ids), tuple(rows))


def mst(dm: DistanceMatrix, subset: Iterable[int] | None = None) -> Tree:
    """Kruskal over the closure restricted to `subset` (all of `dm` if omitted)."""
    ids = sorted(set(dm.ids if subset is None else subset))
    if not ids:
        raise InvalidArgument("mst over an empty subset")
    pos = {x: dm.index(x) for x in ids}
    cand = []
    for a, b in combinations(ids, 2):
        w = dm.dist[pos[a]][pos[b]]
        if w == INF:
            raise Infeasible(f"nodes {a} and {b} are disconnected")
        cand.append((w, a, b))
    cand.sort()
    uf = UnionFind(ids)
    chosen = []
    for w, a, b in cand:
        if uf.union(a, b):
            chosen.append((a, b, w))
            if len(chosen) == len(ids) - 1:
                break
    return Tree.build(ids, chosen)


def kruskal_forest(node_ids: Iterable[int], edges: Iterable[Edge], presorted: bool = False) -> list[Tree]:
    """Minimum spanning forest of the given edges, one Tree per component."""
    nodes = list(node_ids)
    uf = UnionFind(nodes)
    chosen = []
    for e in (edges if presorted else sorted(edges, key=edge_key)):
        if uf.union(e[0], e[1]):
            chosen.append(e)
    groups: dict[int, list[int]] = {}
    for x in nodes:
        groups.setdefault(uf.find(x), []).append(x)
    by_root: dict[int, list[Edge]] = {r: [] for r in groups}
    for e in chosen:
        by_root[uf.find(e[0])].append(e)
    trees = [Tree.build(groups[r], by_root[r]) for r in groups]
    trees.sort(key=lambda t: min(t.nodes))
    return trees


def closure_forest(g: WeightedGraph, subset: Iterable[int], max_dist: float = INF,
                   adj=None) -> list[Tree]:
    """Minimum spanning forest of the metric closure on `subset`, keeping distances <= max_dist.

    Uses the Voronoi bridge graph: each graph edge joining two nearest-terminal
    regions proposes a terminal pair at d(s, u) + w + d(v, t).  A minimum
    spanning tree of these proposals is a minimum spanning tree of the closure
    (Mehlhorn 1988), and its edges carry true shortest-path distances.
    """
    ids = _check_ids(g, subset)
    if not ids:
        raise InvalidArgument("closure over an empty subset")
    if adj is None:
        adj = g.adjacency()
    dist, label = voronoi(adj, ids, cutoff=max_dist)
    cand = []
    for u, v, w in g.edges:
        if u in dist and v in dist and label[u] != label[v]:
            c = dist[u] + w + dist[v]
            if c <= max_dist:
                a, b = sorted((label[u], label[v]))
                cand.append((a, b, c))
    return kruskal_forest(ids, cand)


def closure_mst(g: WeightedGraph, subset: Iterable[int], adj=None) -> Tree:
    forest = closure_forest(g, subset, adj=adj)
    if len(forest) > 1:
        raise Infeasible("subset spans several components")
    return forest[0]


def components_below(g: WeightedGraph, r) -> list[set[int]]:
    """Components of g keeping only edges with weight <= r, ordered by smallest id."""
    uf = UnionFind(range(g.node_count))
    for u, v, w in g.edges:
        if w <= r:
            uf.union(u, v)
    groups: dict[int, set[int]] = {}
    for x in range(g.node_count):
        groups.setdefault(uf.find(x), set()).add(x)
    return sorted(groups.values(), key=min)


def connected_components(g: WeightedGraph) -> list[set[int]]:
    return components_below(g, INF)


def steiner_exact(g: WeightedGraph, terminals: Iterable[int]) -> Tree:
    """Dreyfus-Wagner dynamic program over terminal subsets."""
    terms = _check_ids(g, terminals)
    if not terms:
        raise InvalidArgument("no terminals")
    if len(terms) > STEINER_MAX_TERMINALS:
        raise CapacityError(f"{len(terms)} terminals exceeds {STEINER_MAX_TERMINALS}")
    if len(terms) == 1:
        return Tree.single(terms[0])

    n = g.node_count
    adj = g.adjacency()
    # all-pairs distances with predecessor for path recovery
    dist = []
    pred = []
    for s in range(n):
        d = [INF] * n
        p = [-1] * n
        d[s] = 0
        heap = [(0, s)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > d[u]:
                continue
            for v, w in adj[u]:
                if du + w < d[v]:
                    d[v] = du + w
                    p[v] = u
                    heapq.heappush(heap, (du + w, v))
        dist.append(d)
        pred.append(p)
    t0 = terms[0]
    for t in terms[1:]:
        if dist[t0][t] == INF:
            raise Infeasible(f"terminals {t0} and {t} are disconnected")

    # dp[mask][v]: cheapest tree spanning terminals in mask plus v
    rest = terms[1:]
    q = len(rest)
    full = (1 << q) - 1
    dp = [[INF] * n for _ in range(full + 1)]
    back: list[list[tuple]] = [[()] * n for _ in range(full + 1)]
    for i, t in enumerate(rest):
        row = dp[1 << i]
        for v in range(n):
            row[v] = dist[t][v]
            back[1 << i][v] = ("path", t, v)
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        row = dp[mask]
        brow = back[mask]
        # merge two disjoint sub-masks at a common vertex
        sub = (mask - 1) & mask
        while sub:
            other = mask ^ sub
            if sub < other:
                a, b = dp[sub], dp[other]
                for v in range(n):
                    c = a[v] + b[v]
                    if c < row[v]:
                        row[v] = c
                        brow[v] = ("split", sub, v)
            sub = (sub - 1) & mask
        # extend by a shortest path (Dijkstra over the complete closure)
        base = list(row)
        heap = [(base[v], v) for v in range(n) if base[v] < INF]
        heapq.heapify(heap)
        done = [False] * n
        while heap:
            du, u = heapq.heappop(heap)
            if done[u] or du > row[u]:
                continue
            done[u] = True
            for v, w in adj[u]:
                if du + w < row[v]:
                    row[v] = du + w
                    brow[v] = ("step", u, v)
                    heapq.heappush(heap, (du + w, v))

    edges: set[Edge] = set()

    def add_path(s: int, t: int) -> None:
        x = t
        while x != s:
            y = pred[s][x]
            w = min(w for z, w in adj[x] if z == y)
            edges.add(_norm(x, y, w))
            x = y

    stack = [(full, t0)]
    while stack:
        mask, v = stack.pop()
        kind = back[mask][v]
        if kind[0] == "path":
            add_path(kind[1], v)
        elif kind[0] == "split":
            sub = kind[1]
            stack.append((sub, v))
            stack.append((mask ^ sub, v))
        else:
            u = kind[1]
            w = min(w for z, w in adj[v] if z == u)
            edges.add(_norm(u, v, w))
            stack.append((mask, u))

    # the recovered edge set is connected and has optimal cost; clean up to a tree
    nodes = {x for e in edges for x in e[:2]} | set(terms)
    forest = kruskal_forest(nodes, edges)
    assert len(forest) == 1
    tree = forest[0]
    return prune_leaves(tree, set(terms))


def prune_leaves(tree: Tree, keep: set[int]) -> Tree:
    """Drop non-kept leaves repeatedly."""
    nodes = set(tree.nodes)
    edges = list(tree.edges)
    deg: dict[int, int] = {x: 0 for x in nodes}
    for u, v, _ in edges:
        deg[u] += 1
        deg[v] += 1
    changed = True
    while changed:
        changed = False
        for x in list(nodes):
            if x not in keep and deg[x] <= 1 and len(nodes) > 1:
                nodes.discard(x)
                for e in edges:
                    if x in e[:2]:
                        edges.remove(e)
                        other = e[0] if e[1] == x else e[1]
                        deg[other] -= 1
                        break
                changed = True
    return Tree.build(nodes, edges)
