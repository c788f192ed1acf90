import pytest
import z3

from hyperrepair.automaton import ltl_to_nsa
from hyperrepair.encode import (
    build_acc, build_enc, build_iter, build_trans, choices_contradict, smtlib_script, synthesis_symbols,
)
from hyperrepair.lang import formula as F
from hyperrepair.lang.expr import TRUE, Call, Sort, Var, conj, mk
from hyperrepair.lang.parser import parse_expr, parse_formula, parse_program
from hyperrepair.repair import instrument
from hyperrepair.smt import is_valid
from hyperrepair.symexec import explore_paths

NI = "int h, l, o; output o; @repair o = l + h; observe;"
NI_SPEC = "forall p1. forall p2. (l[p1] == l[p2]) -> (o[p1] == o[p2])"


@pytest.fixture
def ni():
    p = parse_program(NI)
    phi = parse_formula(NI_SPEC, p.sorts)
    sk = instrument(p, ("h", "l"))
    paths = list(explore_paths(sk.program))

    def inst(text):
        return [x.instantiate(sk.definitions([parse_expr(text, p.sorts)])) for x in paths]

    return p, phi, inst


def test_enc_decides_noninterference(ni):
    p, phi, inst = ni
    assert is_valid(build_enc(phi, inst("l + h"), p.variables)) is False
    assert is_valid(build_enc(phi, inst("l"), p.variables)) is True


def test_enc_with_existential_prefix(ni):
    p, _, inst = ni
    some = parse_formula("exists p. o[p] == 3", p.sorts)
    none = parse_formula("exists p. !(o[p] == o[p])", p.sorts)
    assert is_valid(build_enc(some, inst("l + h"), p.variables)) is True
    assert is_valid(build_enc(none, inst("l + h"), p.variables)) is False


def test_acc_edge_cases():
    a = ltl_to_nsa(F.Lit(mk("==", Var("x", Sort.INT, "p"), Var("x", Sort.INT, "p"))))
    with pytest.raises(ValueError):
        build_acc(a, {})
    assert build_acc(a, {"p": ()}) == TRUE
    with pytest.raises(ValueError):
        build_acc(a, {"q": ((("x", Var("x", Sort.INT)),),)})


def test_trans_accepts_the_minimal_fix(ni):
    p, phi, inst = ni
    pp, out, v = inst("l + h"), p.output_vars, p.variables
    good = conj(build_enc(phi, inst("l"), v), build_trans(phi, pp, inst("l"), out, v, shared=True))
    assert is_valid(good) is True
    # every input meets a partner with another h, so changing any output is allowed
    const = conj(build_enc(phi, inst("0"), v), build_trans(phi, pp, inst("0"), out, v, shared=True))
    assert is_valid(const) is True


def test_trans_needs_a_universal_formula_and_outputs(ni):
    p, _, inst = ni
    ex = parse_formula("exists p. o[p] == 1", p.sorts)
    with pytest.raises(ValueError):
        build_trans(ex, inst("l"), inst("l"), p.output_vars, p.variables)
    phi = parse_formula(NI_SPEC, p.sorts)
    with pytest.raises(ValueError):
        build_trans(phi, inst("l"), inst("l"), (), p.variables)


def test_iter_orders_candidates(ni):
    p, phi, inst = ni
    pp, out, v = inst("l + h"), p.output_vars, p.variables
    # l + h + 1 never agrees with l + h; 0 would be incomparable with l (it keeps l + h == 0)
    better = build_iter(pp, inst("l + h + 1"), inst("l"), out, v, shared=True)
    worse = build_iter(pp, inst("l"), inst("l + h + 1"), out, v, shared=True)
    assert is_valid(build_iter(pp, inst("0"), inst("l"), out, v, shared=True)) is False
    same = build_iter(pp, inst("l"), inst("l"), out, v, shared=True)
    assert is_valid(better) is True
    assert is_valid(worse) is False
    assert is_valid(same) is False  # strictness


def test_iter_with_solver_pruning_agrees(ni):
    p, _, inst = ni
    pp, out, v = inst("l + h"), p.output_vars, p.variables
    e = build_iter(pp, inst("l + h + 1"), inst("l"), out, v, shared=True, solver_prune=True)
    assert is_valid(e) is True


def test_choices_contradict_only_on_hole_free_branches():
    assert choices_contradict(((True, False),), ((False, False),))
    assert not choices_contradict(((True, True),), ((False, True),))
    assert not choices_contradict(((True, False), (True, False)), ((True, False), (False, True)))


def test_smtlib_script_is_accepted_by_z3():
    x = Var("x", Sort.INT)
    e = mk("==", Call("f", (x,), Sort.INT), mk("+", x, parse_expr("1", {})))
    assert synthesis_symbols(e) == {"f": ((Sort.INT,), Sort.INT)}
    script = smtlib_script(e, "demo")
    assert script.startswith("; demo\n(set-logic ALL)")
    s = z3.Solver()
    s.from_string(script.replace("(check-sat)", ""))
    assert s.check() == z3.sat
