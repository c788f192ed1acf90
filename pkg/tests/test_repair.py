import pytest

from hyperrepair.cli import run_benchmark
from hyperrepair.corpus import load_corpus
from hyperrepair.lang.expr import Call, Const, Sort, Var, mk, walk
from hyperrepair.lang.parser import parse_formula, parse_program
from hyperrepair.lang.printer import program_str
from hyperrepair.lang.program import statements, stmt_exprs
from hyperrepair.repair import (
    RepairConfig, RepairError, RepairReport, apply_patch, argument_list, instrument, iterative_repair,
    report_table, verify_bounded,
)
from hyperrepair.semantics import FiniteDomain
from hyperrepair.symexec import Bounds

NI = "int h, l, o; output o; @repair o = l + h; observe;"
NI_SPEC = "forall p1. forall p2. (l[p1] == l[p2]) -> (o[p1] == o[p2])"


def load(src, spec):
    p = parse_program(src)
    return p, parse_formula(spec, p.sorts)


def test_argument_list_drops_pure_sinks():
    p = parse_program("int a, b, out, log; output out; log = a; out = a + b; @repair out = out; observe;")
    assert [v.name for v in argument_list(p)] == ["a", "b", "out"]


def test_instrument_builds_holes_in_location_order():
    p = parse_program("int x, f1, c; output c; @repair c = x; @repair if (c > f1) { c = 0; } observe;")
    sk = instrument(p)
    names = [name for name, _, _ in sk.functions]
    assert names == ["f1_", "f2"]  # f1 is taken by a program variable
    assert [s for _, _, s in sk.functions] == [Sort.INT, Sort.BOOL]
    assert sk.original[0] == Var("x", Sort.INT)
    assert "f1_(" in program_str(sk.program)


def test_instrument_argument_override_and_errors():
    p = parse_program(NI)
    sk = instrument(p, ("l",))
    assert sk.functions[0][1] == (Var("l", Sort.INT),)
    with pytest.raises(RepairError):
        instrument(p, ("nope",))
    with pytest.raises(RepairError, match="no @repair"):
        instrument(parse_program("int x; output x; observe;"))


def test_apply_patch_replaces_holes_and_drops_markers():
    p = parse_program(NI)
    sk = instrument(p)
    q = apply_patch(sk, [Var("l", Sort.INT)])
    assert "@repair" not in program_str(q)
    assert "o = l;" in program_str(q)
    assert not any(isinstance(n, Call) for s in statements(q.body) for e in stmt_exprs(s) for n in walk(e))
    with pytest.raises(RepairError):
        sk.definitions([Const(True, Sort.BOOL)])
    with pytest.raises(RepairError):
        sk.definitions([])


def test_verify_bounded_statuses():
    p, phi = load(NI, NI_SPEC)
    assert verify_bounded(p, phi).status == "violated"
    fixed = apply_patch(instrument(p), [Var("l", Sort.INT)])
    v = verify_bounded(fixed, phi)
    assert v.status == "holds-bounded" and v.exact and v.paths == 1
    loop, phi2 = load("int n, c; output c; c = 0; while (c < n) { c = c + 1; } observe;",
                      "forall p1. forall p2. (n[p1] == n[p2]) -> (c[p1] == c[p2])")
    v = verify_bounded(loop, phi2, Bounds(unroll=2))
    assert v.status == "holds-bounded" and not v.exact
    ex = parse_formula("exists p. c[p] == 1", loop.sorts)
    assert verify_bounded(loop, ex, Bounds(unroll=2)).status == "holds-bounded"
    alt = parse_formula("forall p1. exists p2. c[p1] == c[p2]", loop.sorts)
    assert verify_bounded(loop, alt, Bounds(unroll=2)).status == "inconclusive"
    with pytest.raises(RepairError):
        verify_bounded(instrument(p).program, phi)


def test_config_validation():
    with pytest.raises(ValueError):
        RepairConfig(max_iters=-1)
    with pytest.raises(ValueError):
        RepairConfig(timeout=0)


def test_report_table_columns():
    r = RepairReport("demo", "repaired", "optimal", 2, 1, final_size=5, elapsed=1.25)
    lines = report_table([r]).splitlines()
    assert lines[0].split() == ["Instance", "#Iter", "#Locations", "t", "Size", "Status"]
    assert lines[1].split() == ["demo", "2", "1", "1.2", "5", "repaired/optimal"]
    assert '"stop_reason": "optimal"' in r.to_json()


def test_correct_program_needs_no_repair():
    p, phi = load("int h, l, o; output o; @repair o = l; observe;", NI_SPEC)
    r = iterative_repair(p, phi, RepairConfig(timeout=5))
    assert r.status == "no-repair-needed" and r.final_patch == ["l"]


@pytest.mark.solver
def test_iterative_repair_on_noninterference(tmp_path):
    p, phi = load(NI, NI_SPEC)
    cfg = RepairConfig(timeout=20, workdir=str(tmp_path), domain=FiniteDomain.int_range(0, 1))
    r = iterative_repair(p, phi, cfg, "ni")
    assert r.status == "repaired"
    assert r.oracle == "satisfied" and r.bounded["status"] == "holds-bounded"
    assert r.log[-1].patch == ["l"] or r.stop_reason == "timeout"
    assert r.monotone
    assert all(f.endswith(".sy") for f in r.constraint_files)


@pytest.mark.solver
@pytest.mark.parametrize("b", load_corpus("ksafety") + load_corpus("functional"), ids=lambda b: b.name)
def test_direct_mode_corpus(b):
    r = run_benchmark(b)
    assert r.status == "repaired" and r.stop_reason == "single-query"
    assert r.oracle == "satisfied", r.to_json()
    assert r.bounded["status"] == "holds-bounded"


def test_boolean_guard_hole_has_bool_sort():
    p = parse_program("int x, y; output y; @repair if (x > 2) { y = 1; } else { y = 0; } observe;")
    sk = instrument(p)
    q = apply_patch(sk, [mk(">=", Var("x", Sort.INT), Const(2, Sort.INT))])
    assert "if ((x >= 2))" in program_str(q)
