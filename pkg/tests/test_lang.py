import random

import pytest

from hyperrepair.lang import formula as F
from hyperrepair.lang.expr import (
    Const, Quant, Sort, SortError, TRUE, Var, conj, evaluate, mk, pull_forall, quant, simplify, size,
)
from hyperrepair.lang.parser import ParseError, parse_expr, parse_formula, parse_program
from hyperrepair.lang.printer import expr_str, formula_str, program_str
from hyperrepair.lang.program import Assign, If, While, repair_locations

from randprog import rand_source

EDAS_LIKE = """
string phase, decision;
output decision;
observe;
@repair decision = decision;
if (phase == "Done") { observe; } else { observe; }
"""


def test_program_header_and_markers():
    p = parse_program(EDAS_LIKE)
    assert p.sorts == {"phase": Sort.STRING, "decision": Sort.STRING}
    assert p.output_vars == ("decision",)
    locs = repair_locations(p)
    assert len(locs) == 1 and isinstance(locs[0], Assign) and locs[0].loc == 0


def test_repair_marker_on_guards():
    p = parse_program("int x, c; output c; @repair if (x > 0) { c = 1; } @repair while (c < x) { c = c + 1; } observe;")
    kinds = [type(s) for s in repair_locations(p)]
    assert kinds == [If, While]


@pytest.mark.parametrize("src, fragment", [
    ("int x; output y; observe;", "not declared"),
    ("int x; int x; observe;", "declared twice"),
    ("int x; string s; x = s; observe;", "sort error"),
    ("int x; if (x) { skip; } observe;", "guard has sort"),
    ("int x; @repair observe;", "@repair must precede"),
    ("int x; @fix x = 1;", "unknown annotation"),
    ("int x; x = y + 1;", "y"),
])
def test_program_errors(src, fragment):
    with pytest.raises(ParseError) as exc:
        parse_program(src)
    assert fragment in str(exc.value)


def test_printer_round_trip_on_random_programs():
    r = random.Random(0)
    for _ in range(100):
        p = parse_program(rand_source(r, repair=r.random() < 0.5))
        assert parse_program(program_str(p)) == p


def test_expression_round_trip_and_evaluation():
    sorts = {"x": Sort.INT, "s": Sort.STRING, "b": Sort.BOOL}
    for text, env, value in [
        ("x + 1 - 2", {"x": 5}, 4),
        ('s + "a"', {"s": "b"}, "ba"),
        ("ite(b && x >= 2, x, 0 - x)", {"b": True, "x": 3}, 3),
        ("!(x == 1) || b", {"x": 1, "b": False}, False),
        ('"say ""hi"""', {}, 'say "hi"'),
    ]:
        e = parse_expr(text, sorts)
        assert evaluate(e, env) == value
        assert parse_expr(expr_str(e), sorts) == e


def test_mk_rejects_ill_sorted_terms():
    with pytest.raises(SortError):
        mk("+", Var("x", Sort.INT), Const("a", Sort.STRING))


def test_simplify_folds_constants_and_units():
    x = Var("x", Sort.INT)
    one, two = Const(1, Sort.INT), Const(2, Sort.INT)
    assert simplify(mk("+", one, two)) == Const(3, Sort.INT)
    assert simplify(conj(mk("==", x, x), mk("<", x, two))) == mk("<", x, two)
    assert simplify(mk("ite", TRUE, x, two)) == x
    assert size(simplify(mk("ite", mk("==", one, two), two, x))) == 1


def test_pull_forall_lifts_blocks_without_capture():
    x, y = Var("x", Sort.INT, "p"), Var("y", Sort.INT, "q")
    inner = quant("forall", (y,), mk(">=", y, x))
    e = quant("forall", (x,), mk("=>", mk(">=", x, Const(0, Sort.INT)), inner))
    vs, body = pull_forall(e)
    assert set(vs) == {x, y}
    assert not isinstance(body, Quant)


def test_formula_parser_normalizes_into_safety_fragment():
    phi = parse_formula("forall p1. forall p2. (a[p1] == a[p2]) -> G (o[p1] == o[p2])",
                        {"a": Sort.INT, "o": Sort.INT})
    assert phi.universal and phi.trace_vars == ["p1", "p2"]
    assert isinstance(phi.body, F.Or)
    assert F.Lit(mk("==", Var("a", Sort.INT, "p1"), Var("a", Sort.INT, "p2")), False) in phi.body.args
    assert parse_formula(formula_str(phi), {"a": Sort.INT, "o": Sort.INT}) == phi


@pytest.mark.parametrize("text, fragment", [
    ("forall p. !(G (x[p] == 1))", "safety fragment"),
    ("forall p. x[q] == 1", "not bound"),
    ("forall p. forall p. x[p] == 1", "twice"),
    ("forall p. x == 1", "indexed"),
    ("forall p. x[p] + 1", "atom has sort"),
])
def test_formula_errors(text, fragment):
    with pytest.raises(ParseError) as exc:
        parse_formula(text, {"x": Sort.INT})
    assert fragment in str(exc.value)


def test_not_equal_atoms_become_negative_literals():
    phi = parse_formula("forall p. x[p] != 1", {"x": Sort.INT})
    assert phi.body == F.Lit(mk("==", Var("x", Sort.INT, "p"), Const(1, Sort.INT)), False)


def test_evaluate_word_weak_until_and_end_of_word():
    a = F.Lit(Var("a", Sort.BOOL, "p"))
    b = F.Lit(Var("b", Sort.BOOL, "p"))
    w = F.WUntil(a, b)
    word = [{a.atom: True, b.atom: False}, {a.atom: False, b.atom: True}]
    assert F.evaluate_word(w, word)
    assert not F.evaluate_word(F.globally(a), word)
    assert F.evaluate_word(F.Next(F.Next(F.FF)), word)  # beyond the end everything holds
