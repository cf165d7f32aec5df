"""Norm costs, strong-optimality ratios and cover validation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core_metric import INF, Cover, Instance, InvalidArgument, dijkstra


def _p_value(p) -> float:
    if isinstance(p, str):
        p = math.inf if p.strip().lower() in ("inf", "infinity", "oo") else float(p)
    if not (p >= 1):
        raise InvalidArgument(f"p must be >= 1, got {p}")
    return p


def lp_norm(weights: Iterable[int], p) -> float | int:
    """Exact for p in {1, inf}; otherwise scaled by the maximum to avoid overflow."""
    p = _p_value(p)
    ws = list(weights)
    if not ws:
        return 0
    if p == math.inf:
        return max(ws)
    if p == 1:
        return sum(ws)
    top = max(ws)
    if top == 0:
        return 0.0
    return top * math.fsum((w / top) ** p for w in ws) ** (1 / p)


def lp_cost(cover: Cover | Sequence[int], p) -> float | int:
    ws = cover.weights() if isinstance(cover, Cover) else list(cover)
    return lp_norm(ws, p)


@dataclass(frozen=True)
class CostProfile:
    weights: tuple[int, ...]

    @staticmethod
    def of(cover: Cover | Sequence[int]) -> "CostProfile":
        ws = cover.weights() if isinstance(cover, Cover) else list(cover)
        return CostProfile(tuple(sorted(ws, reverse=True)))

    @property
    def l1(self) -> int:
        return sum(self.weights)

    @property
    def linf(self) -> int:
        return self.weights[0] if self.weights else 0

    def lp(self, p) -> float | int:
        return lp_norm(self.weights, p)


def even_baseline(total, k: int) -> list[Fraction]:
    """Total weight spread perfectly evenly over k trees."""
    if k < 1:
        raise InvalidArgument("k must be positive")
    return [Fraction(total) / k] * k


def strong_opt_ratio(weights: Sequence, baseline: Sequence) -> float:
    """Largest ratio of the j heaviest weights to the j heaviest baseline entries."""
    if not weights and not baseline:
        raise InvalidArgument("both weight lists are empty")
    n = max(len(weights), len(baseline))
    a = sorted((Fraction(x) for x in weights), reverse=True) + [Fraction(0)] * (n - len(weights))
    b = sorted((Fraction(x) for x in baseline), reverse=True) + [Fraction(0)] * (n - len(baseline))
    best = None
    sa = sb = Fraction(0)
    for x, y in zip(a, b):
        sa += x
        sb += y
        if sb == 0:
            if sa > 0:
                return math.inf
            continue
        q = sa / sb
        if best is None or q > best:
            best = q
    return 1.0 if best is None else float(best)


def validate(cover: Cover, instance: Instance, disjoint: bool = False) -> list[str]:
    """Violations of the cover rules; empty when the cover is valid.

    With `disjoint` every node must lie in exactly one tree.  Tree edges may be
    closure edges but never shorter than the shortest path they stand for.
    """
    g = instance.graph
    n = g.node_count
    out: list[str] = []
    adj = None
    seen: dict[int, int] = {}
    for idx, t in enumerate(cover.trees):
        bad_ids = sorted(x for x in t.nodes if not (0 <= x < n))
        for x in bad_ids:
            out.append(f"tree {idx} has unknown node {x}")
        if bad_ids:
            continue
        if t.weight != sum(w for _, _, w in t.edges):
            out.append(f"tree {idx} weight {t.weight} does not match its edges")
        if not t.is_spanning_tree():
            out.append(f"tree {idx} is not a spanning tree of its nodes")
        for u, v, w in t.edges:
            if adj is None:
                adj = g.adjacency()
            d = dijkstra(adj, [u], cutoff=w).get(v, INF)
            if d > w:
                out.append(f"tree {idx} edge ({u},{v}) weight {w} is below the distance")
        for x in t.nodes:
            if x in seen and disjoint:
                out.append(f"node {x} in trees {seen[x]} and {idx}")
            seen.setdefault(x, idx)
    for v in range(n):
        if v not in seen:
            out.append(f"uncovered node {v}")
    if instance.k is not None and len(cover.trees) > instance.k:
        out.append(f"{len(cover.trees)} trees exceed k={instance.k}")
    if instance.depots is not None:
        depots = set(instance.depots)
        if cover.depot_of is None:
            out.append("missing depot assignment")
        else:
            if len(cover.trees) != len(depots):
                out.append(f"{len(cover.trees)} trees for {len(depots)} depots")
            used: set[int] = set()
            for idx in range(len(cover.trees)):
                o = cover.depot_of.get(idx)
                if o is None:
                    out.append(f"tree {idx} has no depot")
                    continue
                if o not in depots:
                    out.append(f"node {o} is not a depot")
                if o in used:
                    out.append("depot reused")
                used.add(o)
                if o not in cover.trees[idx].nodes:
                    out.append(f"tree {idx} lacks its depot {o}")
    return out


def report(cover: Cover, instance: Instance, ps: Sequence = (1, 2, math.inf),
           disjoint: bool = False) -> list[str]:
    prof = CostProfile.of(cover)
    lines = [f"l1 {prof.l1}", f"linf {prof.linf}"]
    for p in ps:
        p = _p_value(p)
        label = "inf" if p == math.inf else f"{p:g}"
        lines.append(f"lp {label} {float(prof.lp(p)):.6f}")
    k = max(len(prof.weights), 1)
    ratio = strong_opt_ratio(list(prof.weights), even_baseline(prof.l1, k)) if prof.l1 else 1.0
    lines.append(f"strong_ratio {ratio:.6f}")
    lines.append(f"violations {len(validate(cover, instance, disjoint))}")
    return lines
