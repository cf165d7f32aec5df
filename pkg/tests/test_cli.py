import io
import math
import subprocess
import sys
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import connected_graphs
from treecover.cli import (EXIT_CAPACITY, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, PALETTE, FormatError, emit_grid,
                           emit_instance, emit_solution, main, parse_grid, parse_instance, parse_solution,
                           render_ppm, render_svg)
from treecover.core_metric import Cover, Instance, Tree
from treecover.cover_depot import solve_depot
from treecover.cover_nodepot import solve_nodepot
from treecover.instances import OBSTACLE, GridWorld, gen_grid

EIGHT_CLUSTERS = [2433, 5516, 9528, 4550, 5271, 3985, 2482, 4240]


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    return code, out.getvalue()


def test_gen_spider(tmp_path):
    path = tmp_path / "s.tci"
    assert run("gen", "spider", "--k", 3, "--L", 4, "--out", path)[0] == EXIT_OK
    assert "n 9" in path.read_text().splitlines()


def test_gen_open_grid(tmp_path):
    path = tmp_path / "g.tci"
    assert run("gen", "grid", "--w", 3, "--h", 3, "--density", 0, "--out", path)[0] == EXIT_OK
    lines = path.read_text().splitlines()
    assert "n 9" in lines and "m 12" in lines
    assert (tmp_path / "g.tci.grid").exists()


def test_gen_partition(tmp_path):
    path = tmp_path / "p.tci"
    run("gen", "partition", "--x", "1,1,2", "--out", path)
    inst = parse_instance(path.read_text())
    assert inst.depots == (0, 1) and inst.graph.node_count == 5
    assert "depots 0 1" in path.read_text()


def _solve(tmp_path, inst, *extra):
    ipath, spath = tmp_path / "i.tci", tmp_path / "s.tcs"
    ipath.write_text(emit_instance(inst))
    code, _ = run("solve", ipath, "--out", spath, *extra)
    return code, ipath, spath


def test_solve_star_copies(tmp_path):
    run("gen", "stars", "--n", 1, "--R", 3, "--out", tmp_path / "st.tci")
    code, out = run("solve", tmp_path / "st.tci", "--out", tmp_path / "st.tcs")
    cover = parse_solution((tmp_path / "st.tcs").read_text())
    assert code == EXIT_OK and len(cover.trees) == 4 and sum(cover.weights()) <= 6


def test_solve_single_depot_and_singletons(tmp_path):
    inst = parse_instance("TCI 1\nn 3\nm 2\ndepots 1\n0 1 2\n1 2 5\n")
    _, _, spath = _solve(tmp_path, inst)
    cover = parse_solution(spath.read_text())
    assert cover.weights() == [7] and cover.depot_of == {0: 1}
    inst = parse_instance("TCI 1\nn 3\nm 2\nk 3\n0 1 2\n1 2 5\n")
    _, _, spath = _solve(tmp_path, inst)
    assert parse_solution(spath.read_text()).weights() == [0, 0, 0]


def test_eval_synthetic_solution(tmp_path):
    # eight disjoint paths whose weights are the cluster sizes
    edges, trees, start = [], [], 0
    for w in EIGHT_CLUSTERS:
        edges.append((start, start + 1, w))
        trees.append(Tree.build([start, start + 1], [(start, start + 1, w)]))
        start += 2
    (tmp_path / "i.tci").write_text("TCI 1\nn 16\nm 8\nk 8\n" + "".join(f"{u} {v} {w}\n" for u, v, w in edges))
    (tmp_path / "s.tcs").write_text(emit_solution(Cover(trees)))
    code, out = run("eval", tmp_path / "i.tci", tmp_path / "s.tcs", "--p", "1,inf")
    lines = dict(line.split(" ", 1) for line in out.splitlines())
    assert code == EXIT_OK
    assert lines["l1"] == "38005" and lines["linf"] == "9528"
    assert abs(float(lines["strong_ratio"]) - 2.006) <= 0.005
    assert lines["violations"] == "0"


def test_eval_identical_weights(tmp_path):
    inst = parse_instance("TCI 1\nn 4\nm 3\nk 2\n0 1 3\n1 2 9\n2 3 3\n")
    (tmp_path / "i.tci").write_text(emit_instance(inst))
    cover = Cover([Tree.build([0, 1], [(0, 1, 3)]), Tree.build([2, 3], [(2, 3, 3)])])
    (tmp_path / "s.tcs").write_text(emit_solution(cover))
    _, out = run("eval", tmp_path / "i.tci", tmp_path / "s.tcs", "--p", "1")
    assert "strong_ratio 1.000000" in out and "lp 1 6.000000" in out


def test_oracle_spider(tmp_path):
    run("gen", "spider", "--k", 3, "--L", 4, "--out", tmp_path / "s.tci")
    assert run("oracle", tmp_path / "s.tci", "--p", "1")[0] == EXIT_CAPACITY
    code, out = run("oracle", tmp_path / "s.tci", "--p", "1,inf", "--max-nodes", 9)
    assert code == EXIT_OK
    first, second = out.splitlines()
    assert first.startswith("p 1 ") and "oracle 6.000000" in first
    assert "oracle 4.000000" in second


def test_oracle_all_singletons_ratio_one(tmp_path):
    (tmp_path / "i.tci").write_text("TCI 1\nn 3\nm 2\nk 3\n0 1 1\n1 2 1\n")
    code, out = run("oracle", tmp_path / "i.tci", "--p", "2")
    assert code == EXIT_OK and out.strip().endswith("ratio 1.000000")


def test_oracle_small_grid_within_nine(tmp_path):
    run("gen", "grid", "--w", 4, "--h", 2, "--density", 0, "--k", 3, "--out", tmp_path / "g.tci")
    inst = parse_instance((tmp_path / "g.tci").read_text())
    assert inst.graph.node_count == 8
    code, out = run("oracle", tmp_path / "g.tci", "--p", "1,2,3,inf")
    assert code == EXIT_OK
    assert all(float(line.split()[-1]) <= 9 for line in out.splitlines())


def test_exit_codes(tmp_path):
    assert run("solve", tmp_path / "missing.tci")[0] == EXIT_INPUT
    (tmp_path / "bad.tci").write_text("TCI 2\n")
    assert run("solve", tmp_path / "bad.tci")[0] == EXIT_INPUT
    (tmp_path / "split.tci").write_text("TCI 1\nn 3\nm 1\nk 1\n0 1 1\n")
    assert run("solve", tmp_path / "split.tci")[0] == EXIT_INFEASIBLE
    assert run("bogus")[0] == EXIT_INPUT
    assert run("eval", tmp_path / "split.tci", tmp_path / "split.tci", "--p", "0.5")[0] == EXIT_INPUT


def _bordered():
    # 5x5 with a wall ring around a free 3x3 centre
    cells = tuple(tuple(OBSTACLE if x in (0, 4) or y in (0, 4) else 0 for x in range(5)) for y in range(5))
    return GridWorld(5, 5, cells, "random", 0)


def test_render_two_clusters():
    world = _bordered()
    cover = solve_nodepot(world.graph(), 2)
    ppm = render_ppm(world, cover, scale=1)
    header, body = ppm[:11], ppm[11:]
    assert header == b"P6\n5 5\n255\n"
    colors = {tuple(body[i:i + 3]) for i in range(0, len(body), 3)}
    assert colors == {(0, 0, 0), PALETTE[0], PALETTE[1]}
    assert render_svg(world, cover) == render_svg(world, cover)


def test_render_command_deterministic(tmp_path):
    run("gen", "grid", "--w", 12, "--h", 9, "--seed", 3, "--k", 3, "--out", tmp_path / "g.tci")
    run("solve", tmp_path / "g.tci", "--out", tmp_path / "g.tcs")
    blobs = []
    for name in ("a.svg", "b.svg", "c.ppm"):
        assert run("render", tmp_path / "g.tci.grid", tmp_path / "g.tcs", "--out", tmp_path / name)[0] == EXIT_OK
        blobs.append((tmp_path / name).read_bytes())
    assert blobs[0] == blobs[1] and blobs[2].startswith(b"P6")
    assert run("render", tmp_path / "g.tci", tmp_path / "g.tcs", "--out", tmp_path / "x.svg")[0] == EXIT_INPUT


def test_render_large_grid_fast():
    world, inst = gen_grid(200, 200, "rooms", 200, seed=0)
    cover = solve_nodepot(inst.graph, 8)
    t0 = time.perf_counter()
    svg = render_svg(world, cover)
    ppm = render_ppm(world, cover)
    assert time.perf_counter() - t0 < 1
    assert svg.startswith(b"<svg") and len(ppm) > 200 * 200 * 3


def test_same_invocation_same_bytes(tmp_path):
    for name in ("a", "b"):
        run("gen", "grid", "--w", 15, "--h", 15, "--mode", "rooms", "--seed", 9, "--out", tmp_path / f"{name}.tci")
        run("solve", tmp_path / f"{name}.tci", "--out", tmp_path / f"{name}.tcs")
    for ext in (".tci", ".tci.grid", ".tcs"):
        assert (tmp_path / f"a{ext}").read_bytes() == (tmp_path / f"b{ext}").read_bytes()


def test_bench_reports(monkeypatch):
    monkeypatch.setenv("TC_THREADS", "1")
    code, out = run("bench", "--w", 30, "--h", 30, "--k", 4, "--seeds", "0,1")
    assert code == EXIT_OK and len(out.splitlines()) == 2


def test_apx_cover_output(tmp_path):
    code, _ = run("gen", "apx", "--assignment", "x=0,y=0,z=0", "--out", tmp_path / "a.tci",
                  "--cover-out", tmp_path / "a.tcs")
    assert code == EXIT_OK
    cover = parse_solution((tmp_path / "a.tcs").read_text())
    assert cover.weights() == [3] * 16


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "treecover", "gen", "spider", "--k", "2", "--L", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "n 4" in res.stdout.splitlines()


@settings(max_examples=100, deadline=None)
@given(connected_graphs(nmax=15), st.data())
def test_files_round_trip(g, data):
    if data.draw(st.booleans()):
        inst = Instance(g, k=data.draw(st.integers(1, g.node_count)))
        cover = solve_nodepot(g, inst.k)
    else:
        inst = Instance(g, depots=tuple(data.draw(st.sets(st.integers(0, g.node_count - 1), min_size=1))))
        cover = solve_depot(g, inst.depots)
    assert parse_instance(emit_instance(inst)) == inst
    again = parse_solution(emit_solution(cover))
    assert again.trees == cover.trees and again.depot_of == cover.depot_of


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 25), st.integers(2, 25), st.sampled_from(["random", "rooms"]), st.integers(0, 400),
       st.integers(0, 1000))
def test_grid_round_trip(w, h, mode, density, seed):
    try:
        world, _ = gen_grid(w, h, mode, density, seed)
    except Exception:
        return
    assert parse_grid(emit_grid(world)) == world


def test_solution_without_edges_uses_graph():
    inst = parse_instance("TCI 1\nn 3\nm 2\nk 1\n0 1 2\n1 2 5\n")
    cover = parse_solution("TCS 1\ntree 0 weight 7 nodes 0 1 2\n", inst.graph)
    assert cover.trees[0].weight == 7 and len(cover.trees[0].edges) == 2
    with pytest.raises(FormatError):
        parse_solution("TCS 1\ntree 0 weight 7 nodes 0 1 2\n")
    assert math.isfinite(cover.trees[0].weight)
