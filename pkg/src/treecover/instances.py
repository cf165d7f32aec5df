"""Deterministic instance generators: counterexample families, grid worlds, hardness gadgets."""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

from .core_metric import Cover, Instance, InvalidArgument, WeightedGraph, closure_mst, connected_components

FREE, OBSTACLE, DEPOT = 0, 1, 2
ROOM = 20  # room pitch in cells, wall included


class GenerationError(Exception):
    pass


def gen_path(n: int, k: int, eps_num: int = 1, eps_den: int = 10) -> Instance:
    """Unit path whose first k nodes are joined by edges of length 1 + eps.

    Lengths are scaled by eps_den: unit edges weigh eps_den, the others
    eps_den + eps_num.
    """
    if not (2 <= k <= n):
        raise InvalidArgument(f"need 2 <= k <= n, got k={k}, n={n}")
    if eps_num < 1 or eps_den < 1:
        raise InvalidArgument("eps_num and eps_den must be positive")
    edges = [(i, i + 1, eps_den + eps_num if i < k - 1 else eps_den) for i in range(n - 1)]
    return Instance(WeightedGraph(n, edges), k=k)


def gen_spider(k: int, L: int) -> Instance:
    """Center 0; k-1 legs 0-(2i-1)-(2i) with a unit edge then an edge of length L; L unit spokes."""
    if k < 2 or L < 1:
        raise InvalidArgument("need k >= 2 and L >= 1")
    edges = []
    for i in range(1, k):
        edges.append((0, 2 * i - 1, 1))
        edges.append((2 * i - 1, 2 * i, L))
    for v in range(2 * k - 1, 2 * k + L - 1):
        edges.append((0, v, 1))
    return Instance(WeightedGraph(2 * k + L - 1, edges), k=k)


def gen_star_copies(n: int, R: int) -> Instance:
    """n copies of a 4-star with edges R; centers pairwise joined by edges 2R; k = 5n - 1."""
    if n < 1 or R < 1:
        raise InvalidArgument("need n >= 1 and R >= 1")
    edges = []
    for i in range(n):
        c = 5 * i
        edges.extend((c, c + j, R) for j in range(1, 5))
        edges.extend((c, 5 * h, 2 * R) for h in range(i))
    return Instance(WeightedGraph(5 * n, edges), k=5 * n - 1)


def gen_depot_counterexample(k: int) -> Instance:
    """k depots 0..k-1; a unit path k..2k-1 hangs off depot 0 and depot i reaches path node k+i by an edge of length k.

    Every far depot can take a path node at cost k, so balancing the load
    costs about k per depot while the cheapest cover leaves them all empty.
    """
    if k < 2:
        raise InvalidArgument("need k >= 2")
    edges = [(0, k, 1)]
    edges.extend((k + i, k + i + 1, 1) for i in range(k - 1))
    edges.extend((i, k + i, k) for i in range(1, k))
    return Instance(WeightedGraph(2 * k, edges), depots=tuple(range(k)))


@dataclass(frozen=True)
class GridWorld:
    width: int
    height: int
    cells: tuple[tuple[int, ...], ...]  # cells[y][x] in {FREE, OBSTACLE, DEPOT}
    mode: str
    seed: int
    discarded: int = 0

    def node_cells(self) -> list[tuple[int, int]]:
        """(x, y) of every node, in node-id order (row-major over accessible cells)."""
        return [(x, y) for y in range(self.height) for x in range(self.width)
                if self.cells[y][x] != OBSTACLE]

    def node_of(self) -> dict[tuple[int, int], int]:
        return {c: i for i, c in enumerate(self.node_cells())}

    def graph(self) -> WeightedGraph:
        ids = self.node_of()
        edges = []
        for (x, y), i in ids.items():
            for nb in ((x + 1, y), (x, y + 1)):
                j = ids.get(nb)
                if j is not None:
                    edges.append((i, j, 1))
        return WeightedGraph(len(ids), edges)


def _rooms(w: int, h: int, density: int, rng: random.Random) -> list[list[int]]:
    cells = [[FREE] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            if x % ROOM == 0 or y % ROOM == 0:
                cells[y][x] = OBSTACLE
    # one door in the middle of every wall segment shared by two rooms
    half = ROOM // 2
    for ry in range(0, h, ROOM):
        for x in range(ROOM, w, ROOM):
            y = ry + half
            if y < h and rng.randrange(1000) >= density:
                cells[y][x] = FREE
    for rx in range(0, w, ROOM):
        for y in range(ROOM, h, ROOM):
            x = rx + half
            if x < w and rng.randrange(1000) >= density:
                cells[y][x] = FREE
    return cells


def gen_grid(w: int, h: int, mode: str = "random", density_permille: int = 200, seed: int = 0,
             k: int | None = None, depots: Sequence[tuple[int, int]] | None = None
             ) -> tuple[GridWorld, Instance]:
    """Grid world with 4-neighbour unit edges; only the largest accessible region is kept.

    mode "random" blocks each cell with probability density/1000.  Mode
    "rooms" lays rooms of ROOM cells (wall included) with a one-cell door in
    every shared wall, each door closed with probability density/1000.
    Depot cells given as (x, y) are never blocked.
    """
    if w < 2 or h < 2:
        raise InvalidArgument("grid must be at least 2x2")
    if not (0 <= density_permille <= 1000):
        raise InvalidArgument("density must be in [0, 1000]")
    rng = random.Random(seed)
    if mode == "random":
        cells = [[OBSTACLE if rng.randrange(1000) < density_permille else FREE for _ in range(w)]
                 for _ in range(h)]
    elif mode == "rooms":
        cells = _rooms(w, h, density_permille, rng)
    else:
        raise InvalidArgument(f"unknown grid mode {mode!r}")
    for x, y in depots or ():
        if not (0 <= x < w and 0 <= y < h):
            raise InvalidArgument(f"depot cell ({x},{y}) outside the grid")
        cells[y][x] = DEPOT

    world = GridWorld(w, h, tuple(map(tuple, cells)), mode, seed)
    comps = connected_components(world.graph())
    if not comps:
        raise GenerationError("no free cells")
    keep = max(comps, key=lambda c: (len(c), -min(c)))
    cellpos = world.node_cells()
    discarded = 0
    for i, (x, y) in enumerate(cellpos):
        if i not in keep:
            if cells[y][x] == DEPOT:
                raise GenerationError(f"depot cell ({x},{y}) is cut off from the main region")
            cells[y][x] = OBSTACLE
            discarded += 1
    world = GridWorld(w, h, tuple(map(tuple, cells)), mode, seed, discarded)
    g = world.graph()
    if depots:
        ids = world.node_of()
        inst = Instance(g, depots=tuple(ids[(x, y)] for x, y in depots))
    else:
        inst = Instance(g, k=min(k if k is not None else 8, g.node_count))
    return world, inst


def gen_partition_gadget(x: Sequence[int]) -> Instance:
    """K_{2,n}: depots 0 and 1, item j is node j + 2 with both edges of length x[j]."""
    if not x:
        raise InvalidArgument("empty item list")
    if any(v <= 0 for v in x):
        raise InvalidArgument("items must be positive")
    edges = [(d, j + 2, v) for j, v in enumerate(x) for d in (0, 1)]
    return Instance(WeightedGraph(len(x) + 2, edges), depots=(0, 1))


@dataclass(frozen=True)
class LinearSystem:
    """Equations over GF(2): each is (variable ids, right-hand side bit)."""
    variables: tuple
    equations: tuple[tuple[tuple, int], ...]

    def __init__(self, variables: Iterable, equations: Iterable[tuple[Sequence, int]]):
        vs = tuple(variables)
        eqs = tuple((tuple(vars_), int(rhs)) for vars_, rhs in equations)
        known = set(vs)
        if len(known) != len(vs):
            raise InvalidArgument("duplicate variable")
        for vars_, rhs in eqs:
            if len(vars_) not in (2, 3):
                raise InvalidArgument(f"equation {vars_} has arity {len(vars_)}")
            if len(set(vars_)) != len(vars_) or not set(vars_) <= known:
                raise InvalidArgument(f"equation {vars_} uses unknown or repeated variables")
            if rhs not in (0, 1):
                raise InvalidArgument("right-hand side must be 0 or 1")
        object.__setattr__(self, "variables", vs)
        object.__setattr__(self, "equations", eqs)

    @property
    def regular(self) -> bool:
        counts = {v: 0 for v in self.variables}
        for vars_, _ in self.equations:
            for v in vars_:
                counts[v] += 1
        return all(c == 3 for c in counts.values())

    def satisfied(self, assignment: Mapping) -> list[bool]:
        return [sum(assignment[v] for v in vars_) % 2 == rhs for vars_, rhs in self.equations]


def _solutions(arity: int, rhs: int) -> list[tuple[int, ...]]:
    return [bits for bits in product((0, 1), repeat=arity) if sum(bits) % 2 == rhs]


def apx_labels(sys: LinearSystem) -> dict[tuple, int]:
    """Node id of every gadget node, keyed by a descriptive label."""
    ids: dict[tuple, int] = {}

    def add(label):
        ids[label] = len(ids)

    for v in sys.variables:
        add(("var_hub", v))
        add(("var", v, 0))
        add(("var", v, 1))
    for ci, (vars_, rhs) in enumerate(sys.equations):
        add(("clause_hub", ci))
        sols = _solutions(len(vars_), rhs)
        for bits in sols:
            add(("clause", ci, bits))
        if len(vars_) == 2:
            for bits in sols:
                add(("pendant", ci, bits))
        for bits in sols:
            for pos in range(len(vars_)):
                add(("mid", ci, bits, pos))
    return ids


def gen_apx_gadget(sys: LinearSystem) -> Instance:
    """Tree-cover-with-depots gadget graph of a linear system over GF(2)."""
    ids = apx_labels(sys)
    edges = []
    depots = []
    for v in sys.variables:
        for b in (0, 1):
            edges.append((ids[("var_hub", v)], ids[("var", v, b)], 3))
            depots.append(ids[("var", v, b)])
    for ci, (vars_, rhs) in enumerate(sys.equations):
        hub = ids[("clause_hub", ci)]
        spoke = 3 if len(vars_) == 3 else 2
        for bits in _solutions(len(vars_), rhs):
            c = ids[("clause", ci, bits)]
            depots.append(c)
            edges.append((hub, c, spoke))
            if len(vars_) == 2:
                edges.append((c, ids[("pendant", ci, bits)], 1))
            for pos, (v, b) in enumerate(zip(vars_, bits)):
                mid = ids[("mid", ci, bits, pos)]
                edges.append((c, mid, 1))
                edges.append((mid, ids[("var", v, b)], 1))
    return Instance(WeightedGraph(len(ids), edges), depots=tuple(depots))


def build_completeness_cover(sys: LinearSystem, assignment: Mapping) -> Cover:
    """The cover that follows a variable assignment.

    Each variable hub goes to the depot of the value not chosen.  Each clause
    hub goes to the clause depot matching the assignment, or, for a violated
    clause, to the one that flips the last variable.  Pendants stay with their
    depot.  A path midpoint goes to its clause depot when that depot holds no
    hub, else to its variable depot when that depot carries the chosen value,
    else to the clause depot.
    """
    missing = [v for v in sys.variables if v not in assignment]
    if missing:
        raise InvalidArgument(f"assignment misses variables {missing}")
    f = {v: int(assignment[v]) for v in sys.variables}
    inst = gen_apx_gadget(sys)
    ids = apx_labels(sys)
    owner: dict[int, int] = {}
    for v in sys.variables:
        owner[ids[("var_hub", v)]] = ids[("var", v, 1 - f[v])]
    holds_hub = set()
    for ci, ((vars_, rhs), ok) in enumerate(zip(sys.equations, sys.satisfied(f))):
        bits = [f[v] for v in vars_]
        if not ok:
            bits[-1] = 1 - bits[-1]
        target = ids[("clause", ci, tuple(bits))]
        owner[ids[("clause_hub", ci)]] = target
        holds_hub.add(target)
        if len(vars_) == 2:
            for sol in _solutions(2, rhs):
                owner[ids[("pendant", ci, sol)]] = ids[("clause", ci, sol)]
    for ci, (vars_, rhs) in enumerate(sys.equations):
        for sol in _solutions(len(vars_), rhs):
            c = ids[("clause", ci, sol)]
            for pos, (v, b) in enumerate(zip(vars_, sol)):
                mid = ids[("mid", ci, sol, pos)]
                if c not in holds_hub:
                    owner[mid] = c
                elif b == f[v]:
                    owner[mid] = ids[("var", v, b)]
                else:
                    owner[mid] = c
    groups: dict[int, set[int]] = {o: {o} for o in inst.depots}
    for node, o in owner.items():
        groups[o].add(node)
    g = inst.graph
    trees = [closure_mst(g, groups[o]) for o in inst.depots]
    return Cover(trees, {i: o for i, o in enumerate(inst.depots)})
