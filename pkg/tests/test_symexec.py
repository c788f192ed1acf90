import random

import pytest

from hyperrepair.lang.expr import Call, Sort, Var, mk, walk
from hyperrepair.lang.parser import parse_program
from hyperrepair.repair import instrument
from hyperrepair.semantics import FiniteDomain, run_obs
from hyperrepair.symexec import Bounds, dump_paths, explore_paths

from randprog import rand_program

LOOP = "int n, c; output c; c = 0; while (c < n) { c = c + 1; } observe;"


def test_branches_give_disjoint_paths():
    p = parse_program("int x, o; output o; if (x > 0) { o = 1; observe; } else { o = 2; } observe;")
    ps = explore_paths(p)
    assert len(ps) == 2 and ps.complete
    assert [len(x) for x in ps] == [2, 1]
    for st in FiniteDomain.int_range(-1, 1).stores(p):
        assert sum(x.holds(st) for x in ps) == 1


def test_infeasible_branches_are_pruned():
    src = "int x, o; output o; if (x > 0) { if (x < 0) { o = 1; } } observe;"
    assert len(explore_paths(parse_program(src))) == 2
    assert len(explore_paths(parse_program(src), prune=False)) == 3


def test_loop_unrolling_bound_cuts_paths():
    p = parse_program(LOOP)
    ps = explore_paths(p, Bounds(unroll=2))
    assert not ps.complete
    assert len(ps.maximal) == 3  # zero, one or two iterations
    cut = [x for x in ps if not x.maximal]
    assert len(cut) == 1 and cut[0].depth_exhausted and len(cut[0]) == 0


def test_observation_cap():
    p = parse_program("int c; output c; while (c < 100) { c = c + 1; observe; }")
    ps = explore_paths(p, Bounds(unroll=5, max_observe=3))
    assert all(len(x) <= 3 for x in ps)
    assert any(x.depth_exhausted for x in ps)


def test_path_cap_marks_truncation():
    src = "int a, b, c, o; output o; " + " ".join(
        f"if ({v} > 0) {{ o = o + 1; }}" for v in "abc") + " observe;"
    ps = explore_paths(parse_program(src), Bounds(max_paths=4))
    assert ps.truncated and len(ps) == 4 and not ps.complete


def test_bounds_validation_and_deepening():
    with pytest.raises(ValueError):
        Bounds(unroll=0)
    assert Bounds(unroll=3).deeper() == Bounds(6, 128, 8192)


def test_concretization_matches_execution_with_loops():
    p = parse_program(LOOP)
    ps = explore_paths(p, Bounds(unroll=3))
    for st in FiniteDomain.int_range(0, 3).stores(p):
        live = [x for x in ps.maximal if x.holds(st)]
        assert len(live) == 1
        assert live[0].concretize(st) == [dict(s) for s in run_obs(p, st).stores]


def test_holes_survive_and_instantiate():
    x = Var("x", Sort.INT)
    sk = instrument(parse_program("int x, o; output o; @repair o = x; if (o > 1) { o = 0; } observe;"))
    ps = explore_paths(sk.program)
    assert len(ps) == 2  # a branch on a hole cannot be pruned
    assert all(any(isinstance(n, Call) for n in walk(path.alpha)) for path in ps)
    inst = ps.instantiate(sk.definitions([mk("+", x, x)]))
    st = {"x": 1, "o": 7}
    live = [path for path in inst if path.holds(st)]
    assert len(live) == 1 and live[0].concretize(st) == [{"x": 1, "o": 0}]


def test_dump_paths_is_readable():
    text = dump_paths(explore_paths(parse_program(LOOP), Bounds(unroll=1)))
    assert text.startswith("PATH 0: alpha := ") and "maximal: no" in text


def test_exploration_is_deterministic():
    r = random.Random(9)
    for _ in range(20):
        p = rand_program(r)
        assert explore_paths(p).paths == explore_paths(p).paths
