import pytest

from hyperrepair.lang.expr import Call, Const, Sort, Var, conj, mk, quant
from hyperrepair.synth import (
    Grammar, SolverError, SygusProblem, SynthFun, default_grammar, parse_grammar, parse_solution,
    read_sygus, serialize_sygus, solve,
)

X = Var("x", Sort.INT)
ONE = Const(1, Sort.INT)
EDAS_GRAMMAR = """((Sx String) (Bx Bool) (Vx String) (Kx String))
((Sx String (Vx Kx (ite Bx Sx Sx)))
 (Bx Bool ((= Vx Kx) (not Bx)))
 (Vx String (s))
 (Kx String ("Accept" "Reject")))"""


def inc_problem(grammar=None):
    """f(x) > x over all x, plus a witness w with f(w) = 1."""
    f = SynthFun("f", (X,), Sort.INT, grammar or default_grammar(Sort.INT, (X,)))
    xi, w = Var("x", Sort.INT, "in"), Var("x", Sort.INT, "wit")
    c = conj(
        quant("forall", (xi,), mk(">", Call("f", (xi,), Sort.INT), xi)),
        quant("exists", (w,), mk("==", Call("f", (w,), Sort.INT), ONE)),
    )
    return SygusProblem((f,), c)


def fake(text: str) -> str:
    """A solver command that ignores the problem and prints ``text``."""
    return f"printf '%s\\n' '{text}' # {{file}}"


def test_default_grammar_shape():
    g = default_grammar(Sort.INT, (X,))
    assert g.sort == Sort.INT and g.start == "Ix"
    assert g.derives(mk("+", X, ONE))
    assert g.derives(mk("ite", mk("<=", X, Const(0, Sort.INT)), ONE, X))
    assert not g.derives(Const(2, Sort.INT))
    assert not g.derives(Const(True, Sort.BOOL), "Bx")  # constants only for Bool-sorted symbols
    assert default_grammar(Sort.BOOL, (X,)).derives(Const(True, Sort.BOOL))


def test_string_grammar_uses_literals():
    s = Var("s", Sort.STRING)
    g = default_grammar(Sort.STRING, (s,), ["a", "a", "b"])
    assert g.derives(mk("++", s, Const("b", Sort.STRING)))
    assert not g.derives(Const("c", Sort.STRING))


def test_parse_grammar_and_derivation():
    s = Var("s", Sort.STRING)
    g = parse_grammar(EDAS_GRAMMAR, (s,))
    acc, rej = Const("Accept", Sort.STRING), Const("Reject", Sort.STRING)
    assert g.derives(mk("ite", mk("==", s, acc), rej, s))
    assert not g.derives(mk("ite", mk("==", s, s), rej, s))  # comparisons need a literal on the right
    assert "(Kx String (\"Accept\" \"Reject\"))" in g.to_sygus()


def test_unproductive_grammar_is_rejected():
    with pytest.raises(ValueError):
        parse_grammar("((Ix Int)) ((Ix Int ((+ Ix Ix))))", (X,))
    with pytest.raises(ValueError):
        Grammar("Ix", (("Bx", Sort.BOOL), ("Ix", Sort.INT)), ())


def test_serialization_round_trip_with_witnesses():
    p = inc_problem()
    text = serialize_sygus(p)
    assert "(synth-fun x!wit () Int)" in text
    assert "(declare-var x!in Int)" in text
    assert text.rstrip().endswith("(check-synth)")
    again = read_sygus(text)
    assert again.functions == p.functions
    assert serialize_sygus(again) == text


def test_witnesses_are_renamed_apart():
    w = Var("x", Sort.INT, "wit")
    a = quant("exists", (w,), mk("==", Call("f", (w,), Sort.INT), ONE))
    b = quant("exists", (w,), mk("==", Call("f", (w,), Sort.INT), Const(2, Sort.INT)))
    f = SynthFun("f", (X,), Sort.INT, default_grammar(Sort.INT, (X,)))
    _, witnesses, _ = SygusProblem((f,), conj(a, b)).hoisted()
    assert [v.key for v in witnesses] == ["x!wit", "x!wit2"]


def test_unknown_symbol_is_rejected():
    with pytest.raises(ValueError):
        SygusProblem((), mk("==", Call("g", (X,), Sort.INT), ONE))


def test_parse_solution_checks_signature_and_grammar():
    p = inc_problem()
    (body,) = parse_solution("((define-fun f ((y Int)) Int (+ y 1)))", p)
    assert body == mk("+", X, ONE)
    with pytest.raises(SolverError):
        parse_solution("(define-fun g ((y Int)) Int y)", p)
    with pytest.raises(SolverError):
        parse_solution("(define-fun f ((y Int)) Int (* y 2))", p)
    with pytest.raises(SolverError):
        parse_solution("(define-fun f ((y Int)) Bool true)", p)


def test_solve_with_scripted_outputs(tmp_path):
    p = inc_problem()
    res = solve(p, 10, fake("(define-fun f ((x Int)) Int (+ x 1))"), str(tmp_path), "q")
    assert res.status == "solved" and res.candidate.recheck == "valid"
    assert res.candidate.exprs == (mk("+", X, ONE),) and res.candidate.size == 3
    assert (tmp_path / "q.sy").exists() and (tmp_path / "q.out").exists()
    assert solve(p, 10, fake("infeasible")).status == "unsat"
    assert solve(p, 10, fake("unknown")).status == "unknown"
    assert solve(p, 0.5, "sleep 5 # {file}").status == "unknown"


def test_solve_rejects_wrong_or_broken_answers():
    p = inc_problem()
    with pytest.raises(SolverError, match="re-check"):
        solve(p, 10, fake("(define-fun f ((x Int)) Int x)"))
    with pytest.raises(SolverError, match="exited with status"):
        solve(p, 10, "echo oops; exit 3 # {file}")


@pytest.mark.solver
def test_cvc5_solves_a_small_problem():
    res = solve(inc_problem(), 60)
    assert res.status == "solved"
    (body,) = res.candidate.exprs
    assert body == mk("+", X, ONE) or body == mk("+", ONE, X)
