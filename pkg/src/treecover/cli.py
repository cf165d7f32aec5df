"""Command line: gen, solve, eval, oracle, render, bench.

Exit codes: 0 success, 2 bad input, 3 infeasible instance, 4 oracle capacity exceeded.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence, TextIO

from .core_metric import CapacityError, Cover, Infeasible, Instance, InvalidArgument, Tree, WeightedGraph, closure_mst
from .cover_depot import solve_depot
from .cover_nodepot import CoverParams, solve_nodepot
from .evaluate import CostProfile, even_baseline, lp_cost, report, strong_opt_ratio
from .instances import (
    DEPOT,
    OBSTACLE,
    GenerationError,
    GridWorld,
    LinearSystem,
    build_completeness_cover,
    gen_apx_gadget,
    gen_depot_counterexample,
    gen_grid,
    gen_partition_gadget,
    gen_path,
    gen_spider,
    gen_star_copies,
)
from .oracle import OracleLimit, opt_cover, opt_depot_cover

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_CAPACITY = 0, 2, 3, 4

# 16 colours cycled by tree index; obstacles are black
PALETTE = (
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
    (188, 189, 34), (23, 190, 207), (174, 199, 232), (255, 187, 120),
    (152, 223, 138), (255, 152, 150), (197, 176, 213), (196, 156, 148),
)
UNCOVERED = (255, 255, 255)


class FormatError(ValueError):
    pass


def _lines(text: str) -> list[list[str]]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line.split())
    return out


def _int(tok: str, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"{what}: expected an integer, got {tok!r}") from None


def emit_instance(inst: Instance) -> str:
    g = inst.graph
    out = ["TCI 1", f"n {g.node_count}", f"m {len(g.edges)}"]
    if inst.depots is not None:
        out.append(" ".join(["depots"] + [str(o) for o in inst.depots]))
    else:
        out.append(f"k {inst.k}")
    out.extend(f"{u} {v} {w}" for u, v, w in g.edges)
    return "\n".join(out) + "\n"


def parse_instance(text: str) -> Instance:
    rows = _lines(text)
    if not rows or rows[0] != ["TCI", "1"]:
        raise FormatError("missing header 'TCI 1'")
    try:
        if rows[1][0] != "n" or rows[2][0] != "m":
            raise FormatError("expected 'n <int>' and 'm <int>'")
        n = _int(rows[1][1], "n")
        m = _int(rows[2][1], "m")
        head = rows[3]
    except IndexError:
        raise FormatError("truncated header") from None
    k = depots = None
    if head[0] == "k" and len(head) == 2:
        k = _int(head[1], "k")
    elif head[0] == "depots":
        depots = tuple(_int(t, "depot") for t in head[1:])
    else:
        raise FormatError("expected 'k <int>' or 'depots <id...>'")
    body = rows[4:]
    if len(body) != m:
        raise FormatError(f"header says {m} edges, found {len(body)}")
    edges = []
    for row in body:
        if len(row) != 3:
            raise FormatError(f"bad edge line {' '.join(row)!r}")
        edges.append(tuple(_int(t, "edge") for t in row))
    try:
        return Instance(WeightedGraph(n, edges), k=k, depots=depots)
    except InvalidArgument as exc:
        raise FormatError(str(exc)) from None


def emit_solution(cover: Cover) -> str:
    out = ["TCS 1"]
    for i, t in enumerate(cover.trees):
        depot = "" if cover.depot_of is None else f" depot {cover.depot_of[i]}"
        nodes = " ".join(str(x) for x in sorted(t.nodes))
        out.append(f"tree {i}{depot} weight {t.weight} nodes {nodes}")
        if t.edges:
            out.append(" ".join([f"edges {i}"] + [f"{u} {v} {w}" for u, v, w in t.edges]))
    return "\n".join(out) + "\n"


def parse_solution(text: str, g: WeightedGraph | None = None) -> Cover:
    """Trees without an 'edges' line are rebuilt as closure spanning trees of their nodes (needs g)."""
    rows = _lines(text)
    if not rows or rows[0] != ["TCS", "1"]:
        raise FormatError("missing header 'TCS 1'")
    specs: list[tuple[int | None, int, list[int]]] = []
    edges: dict[int, list[tuple[int, int, int]]] = {}
    for row in rows[1:]:
        if row[0] == "tree":
            idx = _int(row[1], "tree index")
            if idx != len(specs):
                raise FormatError(f"tree {idx} out of order")
            rest = row[2:]
            depot = None
            if rest and rest[0] == "depot":
                depot = _int(rest[1], "depot")
                rest = rest[2:]
            if len(rest) < 3 or rest[0] != "weight" or rest[2] != "nodes":
                raise FormatError(f"bad tree line {' '.join(row)!r}")
            specs.append((depot, _int(rest[1], "weight"), [_int(t, "node") for t in rest[3:]]))
        elif row[0] == "edges":
            idx = _int(row[1], "tree index")
            vals = [_int(t, "edge") for t in row[2:]]
            if len(vals) % 3:
                raise FormatError("edge list length is not a multiple of 3")
            edges[idx] = [tuple(vals[i:i + 3]) for i in range(0, len(vals), 3)]
        else:
            raise FormatError(f"unknown line {row[0]!r}")
    trees = []
    for i, (_, weight, nodes) in enumerate(specs):
        if not nodes:
            raise FormatError(f"tree {i} has no nodes")
        if i in edges:
            es = edges[i]
        elif len(nodes) == 1:
            es = []
        elif g is not None:
            es = list(closure_mst(g, nodes).edges)
        else:
            raise FormatError(f"tree {i} has no edges and no graph was given")
        built = Tree.build(nodes, es)
        trees.append(Tree(built.nodes, built.edges, weight))
    depots = [d for d, _, _ in specs]
    if any(d is not None for d in depots):
        if any(d is None for d in depots):
            raise FormatError("either every tree or no tree names a depot")
        return Cover(trees, {i: d for i, d in enumerate(depots)})
    return Cover(trees)


def emit_grid(world: GridWorld) -> str:
    chars = {0: ".", OBSTACLE: "#", DEPOT: "D"}
    out = ["TCG 1", f"size {world.width} {world.height}", f"mode {world.mode}",
           f"seed {world.seed}", f"discarded {world.discarded}"]
    out.extend("".join(chars[c] for c in row) for row in world.cells)
    return "\n".join(out) + "\n"


def parse_grid(text: str) -> GridWorld:
    rows = [r.rstrip("\n") for r in text.splitlines() if r.strip()]
    if not rows or rows[0].strip() != "TCG 1":
        raise FormatError("missing header 'TCG 1'")
    meta = {}
    i = 1
    while i < len(rows) and rows[i].split()[0] in ("size", "mode", "seed", "discarded"):
        parts = rows[i].split()
        meta[parts[0]] = parts[1:]
        i += 1
    if "size" not in meta or len(meta["size"]) != 2:
        raise FormatError("missing 'size <w> <h>'")
    w, h = (_int(t, "size") for t in meta["size"])
    body = rows[i:]
    if len(body) != h or any(len(r) != w for r in body):
        raise FormatError(f"grid body does not match size {w}x{h}")
    codes = {".": 0, "#": OBSTACLE, "D": DEPOT}
    try:
        cells = tuple(tuple(codes[ch] for ch in r) for r in body)
    except KeyError as exc:
        raise FormatError(f"unknown grid character {exc.args[0]!r}") from None
    return GridWorld(w, h, cells, meta.get("mode", ["random"])[0],
                     _int(meta.get("seed", ["0"])[0], "seed"),
                     _int(meta.get("discarded", ["0"])[0], "discarded"))


def _cell_colors(world: GridWorld, cover: Cover) -> list[list[tuple[int, int, int]]]:
    cells = world.node_cells()
    color_of: dict[int, tuple[int, int, int]] = {}
    for i, t in enumerate(cover.trees):
        for x in sorted(t.nodes):
            color_of.setdefault(x, PALETTE[i % len(PALETTE)])
    grid = [[(0, 0, 0)] * world.width for _ in range(world.height)]
    for node, (x, y) in enumerate(cells):
        grid[y][x] = color_of.get(node, UNCOVERED)
    return grid


def render_svg(world: GridWorld, cover: Cover, scale: int = 4) -> bytes:
    grid = _cell_colors(world, cover)
    w, h = world.width * scale, world.height * scale
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}" shape-rendering="crispEdges">']
    for y, row in enumerate(grid):
        # merge horizontal runs of one colour into a single rect
        x = 0
        while x < world.width:
            c = row[x]
            end = x
            while end + 1 < world.width and row[end + 1] == c:
                end += 1
            out.append(f'<rect x="{x * scale}" y="{y * scale}" width="{(end - x + 1) * scale}" '
                       f'height="{scale}" fill="#{c[0]:02x}{c[1]:02x}{c[2]:02x}"/>')
            x = end + 1
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode()


def render_ppm(world: GridWorld, cover: Cover, scale: int = 2) -> bytes:
    grid = _cell_colors(world, cover)
    body = bytearray()
    for row in grid:
        line = b"".join(bytes(c) * scale for c in row)
        body += line * scale
    return f"P6\n{world.width * scale} {world.height * scale}\n255\n".encode() + bytes(body)


def _parse_ps(text: str) -> list[float]:
    ps = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        p = math.inf if tok in ("inf", "infinity") else float(tok)
        if not (p >= 1):
            raise InvalidArgument(f"p must be >= 1, got {tok}")
        ps.append(p)
    return ps


def _fmt_p(p: float) -> str:
    return "inf" if p == math.inf else f"{p:g}"


def _parse_equations(text: str) -> LinearSystem:
    eqs = []
    names: list[str] = []
    for part in text.split(";"):
        toks = part.split()
        if not toks:
            continue
        *vars_, rhs = toks
        for v in vars_:
            if v not in names:
                names.append(v)
        eqs.append((vars_, _int(rhs, "right-hand side")))
    return LinearSystem(names, eqs)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _write(path: str | None, data: str | bytes, stdout: TextIO) -> None:
    if path is None or path == "-":
        stdout.write(data if isinstance(data, str) else data.decode())
        return
    with open(path, "wb" if isinstance(data, bytes) else "w") as fh:
        fh.write(data)


def solve_instance(inst: Instance, params: CoverParams = CoverParams()) -> Cover:
    if inst.depots is not None:
        return solve_depot(inst.graph, inst.depots)
    return solve_nodepot(inst.graph, inst.k, params)


def cmd_gen(args, out: TextIO) -> int:
    kind = args.kind
    world = None
    cover = None
    k = args.k if args.k is not None else {"path": 2, "spider": 3, "depotcx": 4}.get(kind)
    if kind == "path":
        inst = gen_path(args.n, k, args.eps_num, args.eps_den)
    elif kind == "spider":
        inst = gen_spider(k, args.L)
    elif kind == "stars":
        inst = gen_star_copies(args.n, args.R)
    elif kind == "depotcx":
        inst = gen_depot_counterexample(k)
    elif kind == "grid":
        depots = None
        if args.depots:
            depots = [tuple(_int(t, "depot cell") for t in cell.split(","))
                      for cell in args.depots.split(";") if cell.strip()]
        world, inst = gen_grid(args.w, args.h, args.mode, args.density, args.seed, args.k, depots)
    elif kind == "partition":
        inst = gen_partition_gadget([_int(t, "x") for t in args.x.split(",")])
    elif kind == "apx":
        system = _parse_equations(args.equations)
        inst = gen_apx_gadget(system)
        if args.assignment:
            values = dict(kv.split("=") for kv in args.assignment.split(","))
            cover = build_completeness_cover(system, {v: _int(b, "value") for v, b in values.items()})
    else:
        raise InvalidArgument(f"unknown generator {kind!r}")
    _write(args.out, emit_instance(inst), out)
    if world is not None and (args.grid_out or args.out):
        _write(args.grid_out or args.out + ".grid", emit_grid(world), out)
    if cover is not None and args.cover_out:
        _write(args.cover_out, emit_solution(cover), out)
    summary = f"nodes {inst.graph.node_count} edges {len(inst.graph.edges)}"
    summary += f" depots {len(inst.depots)}" if inst.depots is not None else f" k {inst.k}"
    if world is not None:
        summary += f" discarded {world.discarded}"
    print(summary, file=out if args.out else sys.stderr)
    return EXIT_OK


def cmd_solve(args, out: TextIO) -> int:
    inst = parse_instance(_read(args.instance))
    params = CoverParams(heuristic_tight_split=args.heuristic_tight, post_split_to_k=not args.no_post_split)
    cover = solve_instance(inst, params)
    _write(args.out, emit_solution(cover), out)
    prof = CostProfile.of(cover)
    print(f"trees {len(cover.trees)}\nl1 {prof.l1}\nlinf {prof.linf}", file=out if args.out else sys.stderr)
    return EXIT_OK


def cmd_eval(args, out: TextIO) -> int:
    inst = parse_instance(_read(args.instance))
    cover = parse_solution(_read(args.solution), inst.graph)
    n = inst.graph.node_count
    for t in cover.trees:
        if any(not (0 <= x < n) for x in t.nodes):
            raise FormatError("solution names nodes outside the instance")
    disjoint = inst.depots is None
    for line in report(cover, inst, _parse_ps(args.p), disjoint=disjoint):
        print(line, file=out)
    return EXIT_OK


def cmd_oracle(args, out: TextIO) -> int:
    inst = parse_instance(_read(args.instance))
    limit = OracleLimit(max_nodes=args.max_nodes, max_k=args.max_k)
    cover = solve_instance(inst)
    for p in _parse_ps(args.p):
        if inst.depots is not None:
            best, _ = opt_depot_cover(inst.graph, inst.depots, p, limit)
        else:
            best, _ = opt_cover(inst.graph, inst.k, p, limit)
        mine = lp_cost(cover, p)
        if best == 0:
            ratio = 1.0 if mine == 0 else math.inf
        else:
            ratio = mine / best
        print(f"p {_fmt_p(p)} solver {float(mine):.6f} oracle {float(best):.6f} ratio {ratio:.6f}", file=out)
    return EXIT_OK


def cmd_render(args, out: TextIO) -> int:
    world = parse_grid(_read(args.grid))
    cover = parse_solution(_read(args.solution), world.graph())
    n = len(world.node_cells())
    if any(x >= n or x < 0 for t in cover.trees for x in t.nodes):
        raise FormatError("solution does not belong to this grid")
    fmt = args.format or ("ppm" if args.out.endswith(".ppm") else "svg")
    data = render_ppm(world, cover, args.scale) if fmt == "ppm" else render_svg(world, cover, args.scale)
    with open(args.out, "wb") as fh:
        fh.write(data)
    print(f"wrote {args.out} ({fmt}, {len(cover.trees)} clusters)", file=out)
    return EXIT_OK


def _bench_one(job):
    w, h, mode, density, seed, k = job
    _, inst = gen_grid(w, h, mode, density, seed, k)
    t0 = time.perf_counter()
    cover = solve_nodepot(inst.graph, inst.k)
    elapsed = time.perf_counter() - t0
    ws = cover.weights()
    ratio = strong_opt_ratio(ws, even_baseline(sum(ws), len(ws))) if sum(ws) else 1.0
    return seed, inst.graph.node_count, elapsed, sum(ws), max(ws), ratio


def worker_count() -> int:
    raw = os.environ.get("TC_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise InvalidArgument(f"TC_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def cmd_bench(args, out: TextIO) -> int:
    seeds = [_int(s, "seed") for s in args.seeds.split(",")]
    jobs = [(args.w, args.h, args.mode, args.density, s, args.k) for s in seeds]
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_bench_one, jobs))
    else:
        results = [_bench_one(j) for j in jobs]
    for seed, n, el, l1, linf, ratio in results:
        print(f"seed {seed} n {n} seconds {el:.3f} l1 {l1} linf {linf} strong_ratio {ratio:.4f}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treecover", description="Tree cover solvers and tools")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("kind", choices=["path", "spider", "stars", "depotcx", "grid", "partition", "apx"])
    g.add_argument("--n", type=int, default=6)
    g.add_argument("--k", type=int)
    g.add_argument("--L", type=int, default=4)
    g.add_argument("--R", type=int, default=1)
    g.add_argument("--eps-num", type=int, default=1)
    g.add_argument("--eps-den", type=int, default=10)
    g.add_argument("--w", type=int, default=20)
    g.add_argument("--h", type=int, default=20)
    g.add_argument("--mode", choices=["random", "rooms"], default="random")
    g.add_argument("--density", type=int, default=200, help="obstacle or closed-door rate in permille")
    g.add_argument("--depots", help="depot cells as 'x,y;x,y'")
    g.add_argument("--x", default="1,1,2", help="partition items, comma separated")
    g.add_argument("--equations", default="x y 0; y z 0; x z 0; x y z 0",
                   help="equations as 'vars... rhs' separated by ';'")
    g.add_argument("--assignment", help="variable values 'x=0,y=1' for the completeness cover")
    g.add_argument("--cover-out")
    g.add_argument("--grid-out")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--heuristic-tight", action="store_true")
    s.add_argument("--no-post-split", action="store_true")
    s.add_argument("--seed", type=int, default=0, help="accepted for uniformity; the solvers are deterministic")
    s.add_argument("--out")

    e = sub.add_parser("eval", help="evaluate a solution")
    e.add_argument("instance")
    e.add_argument("solution")
    e.add_argument("--p", default="1,2,inf")
    e.add_argument("--seed", type=int, default=0)

    o = sub.add_parser("oracle", help="compare the solver with the exact optimum")
    o.add_argument("instance")
    o.add_argument("--p", default="1,2,inf")
    o.add_argument("--max-nodes", type=int, default=OracleLimit().max_nodes)
    o.add_argument("--max-k", type=int, default=OracleLimit().max_k)
    o.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("render", help="draw a grid solution as SVG or PPM")
    r.add_argument("grid")
    r.add_argument("solution")
    r.add_argument("--out", required=True)
    r.add_argument("--format", choices=["svg", "ppm"])
    r.add_argument("--scale", type=int, default=4)
    r.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bench", help="time the solver on seeded grids")
    b.add_argument("--w", type=int, default=200)
    b.add_argument("--h", type=int, default=200)
    b.add_argument("--mode", choices=["random", "rooms"], default="rooms")
    b.add_argument("--density", type=int, default=200)
    b.add_argument("--k", type=int, default=8)
    b.add_argument("--seeds", default="0")
    b.add_argument("--seed", type=int, default=0)
    return ap


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "eval": cmd_eval,
            "oracle": cmd_oracle, "render": cmd_render, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args, out)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (FormatError, InvalidArgument, GenerationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
