"""Splitting trees into edge-disjoint subtrees of bounded weight."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .core_metric import Edge, InvalidArgument, Tree, dijkstra


@dataclass(frozen=True)
class SplitBand:
    lo: int
    hi: int

    def __post_init__(self):
        if not (0 < self.lo <= self.hi):
            raise InvalidArgument(f"bad band ({self.lo}, {self.hi})")


def rooted(t: Tree, root: int | None = None):
    """Parent map, parent-edge map and a pre-order list for t rooted at `root`."""
    if root is None:
        root = min(t.nodes)
    adj: dict[int, list[Edge]] = {x: [] for x in t.nodes}
    for e in t.edges:
        adj[e[0]].append(e)
        adj[e[1]].append(e)
    parent = {root: -1}
    up_edge: dict[int, Edge] = {}
    order = [root]
    stack = [root]
    while stack:
        u = stack.pop()
        for e in sorted(adj[u], key=lambda e: e[0] + e[1] - u):
            v = e[0] + e[1] - u
            if v not in parent:
                parent[v] = u
                up_edge[v] = e
                order.append(v)
                stack.append(v)
    return parent, up_edge, order


def _piece(edges: list[Edge]) -> Tree:
    nodes = {x for e in edges for x in e[:2]}
    return Tree.build(nodes, edges)


def split_tree(t: Tree, band: SplitBand, max_edge: int | None = None,
               merge_residual: bool = True) -> list[Tree]:
    """Post-order greedy cutting of edge-disjoint subtrees of weight >= band.lo.

    Each node packs the bags handed up by its children (bag plus connecting
    edge) first-fit into open bags that stay within band.hi; a bag is cut as
    soon as it reaches band.lo.  With band.hi >= 2*band.lo there is only ever
    one open bag and this is the plain greedy.  The bag left at the root
    (weight < lo) is merged into the most recently cut piece, which always
    shares a node with it, unless merge_residual is False, in which case it is
    returned last.
    """
    if max_edge is None:
        max_edge = max((w for _, _, w in t.edges), default=0)
    for _, _, w in t.edges:
        if w > max_edge:
            raise InvalidArgument(f"edge weight {w} above declared max_edge {max_edge}")
    if max_edge > band.lo:
        raise InvalidArgument(f"max_edge {max_edge} exceeds band.lo {band.lo}")
    if t.weight < band.lo:
        return [t]

    lo, hi = band.lo, band.hi
    parent, up_edge, order = rooted(t)
    children: dict[int, list[int]] = {x: [] for x in t.nodes}
    for x in order[1:]:
        children[parent[x]].append(x)

    pieces: list[list[Edge]] = []
    carry: dict[int, tuple[int, list[Edge]]] = {}
    for v in reversed(order):
        open_bags: list[list] = []  # [weight, edges]
        for c in children[v]:
            cw, ce = carry.pop(c)
            e = up_edge[c]
            cw += e[2]
            ce.append(e)
            if cw >= lo:
                pieces.append(ce)
                continue
            for bag in open_bags:
                if bag[0] + cw <= hi:
                    bag[0] += cw
                    bag[1].extend(ce)
                    if bag[0] >= lo:
                        pieces.append(bag[1])
                        open_bags.remove(bag)
                    break
            else:
                open_bags.append([cw, ce])
        weight = sum(b[0] for b in open_bags)
        edges = [e for b in open_bags for e in b[1]]
        if weight >= lo:
            pieces.append(edges)
            weight, edges = 0, []
        carry[v] = (weight, edges)

    _, residual = carry[order[0]]
    if residual:
        if merge_residual and pieces:
            pieces[-1].extend(residual)
        else:
            pieces.append(residual)
    return [_piece(p) for p in pieces]


def split_evenly(t: Tree) -> tuple[Tree, Tree]:
    """Remove the single edge minimizing the heavier side."""
    if len(t.nodes) < 2:
        raise InvalidArgument("cannot split a single-node tree")
    parent, up_edge, order = rooted(t)
    below: dict[int, int] = {x: 0 for x in t.nodes}
    for x in reversed(order[1:]):
        below[parent[x]] += below[x] + up_edge[x][2]
    best = None
    for x in order[1:]:
        lower = below[x]
        upper = t.weight - lower - up_edge[x][2]
        key = (max(lower, upper),) + tuple(sorted(up_edge[x][:2]))
        if best is None or key < best[0]:
            best = (key, x)
    cut = best[1]
    side = {cut}
    for x in order:  # pre-order: parents come first
        if x != cut and parent[x] in side and x not in side:
            side.add(x)
    low_edges = [e for e in t.edges if e[0] in side and e[1] in side]
    high_edges = [e for e in t.edges if not (e[0] in side or e[1] in side)]
    a = Tree.build(side, low_edges)
    b = Tree.build(t.nodes - side, high_edges)
    return (a, b) if min(a.nodes) < min(b.nodes) else (b, a)


class _Bag(NamedTuple):
    consumed: int       # bag weight plus the edge to the parent
    attach: int         # weight of that edge
    child: int
    nodes: list
    edges: list
    up: Edge


def _join_without(bags: list[_Bag], adj) -> Tree:
    """Bags rejoined by shortest paths from the one with the lightest attaching edge."""
    nodes = [x for b in bags for x in b.nodes]
    edges = [e for b in bags for e in b.edges]
    if len(bags) > 1:
        hub = min(bags, key=lambda b: (b.attach, b.child))
        dist = dijkstra(adj, [hub.child], cutoff=hub.attach + max(b.attach for b in bags))
        for b in bags:
            if b is not hub:
                x, y = sorted((hub.child, b.child))
                edges.append((x, y, dist[b.child]))
    return Tree.build(nodes, edges)


def _join_via(v: int, bags: list[_Bag], extra: Tree | None = None) -> Tree:
    nodes = [v] + [x for b in bags for x in b.nodes]
    edges = [e for b in bags for e in b.edges] + [b.up for b in bags]
    if extra is not None:
        nodes.extend(extra.nodes)
        edges.extend(extra.edges)
    return Tree.build(nodes, edges)


def split_tree_disjoint(t: Tree, band: SplitBand, adj, max_edge: int | None = None,
                        merge_residual: bool = False) -> list[Tree]:
    """Node-disjoint variant of split_tree.

    Every node v keeps a bag containing v.  At v the bags handed up by the
    children (bag plus connecting edge) are grouped: each group starts with
    the heaviest remaining bag and takes the lightest ones until its summed
    weight reaches band.lo, never passing band.hi.  A finished group is cut off
    without v and its bags are rejoined by shortest paths from the bag with
    the lightest connecting edge; with band.hi >= 2*lo - 2 this keeps every
    piece at or below 2*lo - 2.  Unfinished bags stay with v.  If rejoining a
    group costs more than routing it through v, v and its bag move into that
    group when the sum stays within band.hi.  The pieces plus the bag left at
    the root number at most t.weight // lo + 1.  The root bag comes last; with
    merge_residual it is folded into the lightest piece it touches.  `adj` is
    the adjacency of the graph that supplies shortest-path distances.
    """
    if max_edge is None:
        max_edge = max((w for _, _, w in t.edges), default=0)
    if max_edge > band.lo:
        raise InvalidArgument(f"max_edge {max_edge} exceeds band.lo {band.lo}")
    if t.weight < band.lo:
        return [t]
    lo, hi = band.lo, band.hi
    parent, up_edge, order = rooted(t)
    children: dict[int, list[int]] = {x: [] for x in t.nodes}
    for x in order[1:]:
        children[parent[x]].append(x)

    pieces: list[tuple[int, Tree, bool]] = []  # (node cut at, tree, routed through it)
    cut_groups: dict[int, list] = {}
    carry: dict[int, tuple | None] = {}
    for v in reversed(order):
        bags = []
        for c in children[v]:
            got = carry.pop(c)
            if got is not None:
                e = up_edge[c]
                bags.append(_Bag(got[0] + e[2], e[2], c, got[1], got[2], e))
        rest = deque(sorted(bags, key=lambda b: (-b.consumed, b.child)))
        groups = []
        left: list[_Bag] = []
        while rest:
            grp = [rest.popleft()]
            total = grp[0].consumed
            while total < lo and rest and total + rest[-1].consumed <= hi:
                grp.append(rest.pop())
                total += grp[-1].consumed
            if total >= lo:
                groups.append((total, grp, _join_without(grp, adj)))
            else:
                left.extend(grp)
        weight = sum(b.consumed for b in left)
        joined = None
        if groups:
            up_w = up_edge[v][2] if v in up_edge else 0
            best = max(range(len(groups)), key=lambda i: groups[i][2].weight - groups[i][0])
            total, grp, tree = groups[best]
            if tree.weight > total - up_w and total + weight <= hi:
                joined = best
        for i, (total, grp, tree) in enumerate(groups):
            if i == joined:
                pieces.append((v, _join_via(v, grp + left), True))
            else:
                pieces.append((v, tree, False))
                cut_groups[len(pieces) - 1] = grp
        if joined is not None:
            carry[v] = None
        elif weight >= lo:
            pieces.append((v, _join_via(v, left), True))
            carry[v] = None
        else:
            nodes = [v] + [x for b in left for x in b.nodes]
            edges = [e for b in left for e in b.edges] + [b.up for b in left]
            carry[v] = (weight, nodes, edges)

    trees = [tree for _, tree, _ in pieces]
    residual = carry[order[0]]
    if residual is None:
        return trees
    res_tree = Tree.build(residual[1], residual[2])
    if merge_residual:
        # cheapest piece touching the root bag: a group cut at one of its
        # nodes, or a piece routed through a child of one of its nodes
        inside = res_tree.nodes
        best = None
        for idx, (v, tree, via) in enumerate(pieces):
            if not via and v in inside:
                w = sum(b.consumed for b in cut_groups[idx])
            elif via and parent[v] in inside:
                w = tree.weight + up_edge[v][2]
            else:
                continue
            if best is None or (w, -idx) < best[0]:
                best = ((w, -idx), idx)
        if best is not None:
            idx = best[1]
            v, tree, via = pieces[idx]
            if via:
                trees[idx] = Tree.build(tree.nodes | res_tree.nodes,
                                        tree.edges + res_tree.edges + (up_edge[v],))
            else:
                trees[idx] = _join_via(v, cut_groups[idx], res_tree)
            return trees
    return trees + [res_tree]
