import pytest

from hyperrepair.lang.parser import parse_formula, parse_program
from hyperrepair.semantics import (
    FiniteDomain, Inconclusive, TraceTable, check_traces, length_divergent, oracle_better,
    oracle_check_hyperltl, oracle_fully_transparent, oracle_preserved_inputs, parse_domain, run_obs,
    violating_inputs,
)

NI = "int h, l, o; output o; o = {}; observe;"
NI_SPEC = "forall p1. forall p2. (l[p1] == l[p2]) -> (o[p1] == o[p2])"
BITS = FiniteDomain.int_range(0, 1)


def load(src, spec):
    p = parse_program(src)
    return p, parse_formula(spec, p.sorts)


def test_run_obs_records_each_observe():
    p = parse_program("int x, y; output y; y = x; observe; y = y + 1; observe;")
    o = run_obs(p, {"x": 4, "y": 0})
    assert o.terminated and len(o) == 2
    assert [s["y"] for s in (o[0], o[1])] == [4, 5]
    assert o.project(["y"]) == ((4,), (5,))


def test_run_obs_out_of_fuel_is_flagged():
    p = parse_program("int x; while (x >= 0) { x = x + 1; observe; }")
    o = run_obs(p, {"x": 0}, fuel=20)
    assert not o.terminated and 0 < len(o) < 20
    with pytest.raises(ValueError):
        run_obs(p, {})


def test_oracle_on_noninterference():
    p, phi = load(NI.format("l + h"), NI_SPEC)
    assert not oracle_check_hyperltl(p, phi, BITS)
    assert len(violating_inputs(p, phi, BITS)) == 8  # every store meets a partner with the other h
    q, _ = load(NI.format("l"), NI_SPEC)
    assert oracle_check_hyperltl(q, phi, BITS)


def test_existential_and_alternating_prefixes():
    p = parse_program("int x, o; output o; o = x + x; observe;")
    some_two = parse_formula("exists p. o[p] == 2", p.sorts)
    some_three = parse_formula("exists p. o[p] == 3", p.sorts)
    assert oracle_check_hyperltl(p, some_two, BITS)
    assert not oracle_check_hyperltl(p, some_three, BITS)
    other = parse_formula("forall p1. exists p2. !(o[p1] == o[p2])", p.sorts)
    assert oracle_check_hyperltl(p, other, BITS)
    assert not oracle_check_hyperltl(p, other, FiniteDomain(ints=(1,)))


def test_shortest_trace_rule():
    p, phi = load("int x; output x; if (x > 0) { observe; } observe;",
                  "forall p1. forall p2. X (x[p1] == x[p2])")
    assert oracle_check_hyperltl(p, phi, BITS)  # x = 0 has one observation, so X is vacuous
    assert not oracle_check_hyperltl(p, phi, FiniteDomain.int_range(0, 2))
    q = parse_program("int x; output x; observe;")
    assert length_divergent([p, q], BITS)
    assert not length_divergent([q, q], BITS)


def test_preservation_oracles():
    p, phi = load(NI.format("l + h"), NI_SPEC)
    q, _ = load(NI.format("l"), NI_SPEC)
    s, _ = load(NI.format("0"), NI_SPEC)
    assert len(oracle_preserved_inputs(p, q, None, BITS)) == 4  # h = 0
    assert len(oracle_preserved_inputs(p, s, None, BITS)) == 2  # h = l = 0
    assert oracle_fully_transparent(p, q, phi, BITS)
    assert oracle_better(p, s, q, phi, BITS)
    assert not oracle_better(p, q, s, phi, BITS)
    assert not oracle_better(p, q, q, phi, BITS)  # never strictly better than itself


def test_transparency_requires_satisfaction():
    p, phi = load(NI.format("l + h"), NI_SPEC)
    assert not oracle_fully_transparent(p, p, phi, BITS)


def test_trace_table_raises_inconclusive():
    p = parse_program("int x; while (x >= 0) { x = x + 1; } observe;")
    with pytest.raises(Inconclusive):
        TraceTable.build(p, BITS, fuel=50)


def test_check_traces_deduplicates_stores():
    p, phi = load(NI.format("l"), NI_SPEC)
    t = TraceTable.build(p, BITS)
    assert len(t.runs) == 8 and len(t.traces()) == 4  # the initial o is overwritten before observe
    assert check_traces(phi, t.traces())


def test_parse_domain_formats():
    p, phi = load('string s; int n; bool b; output s; s = "x"; observe;',
                  'forall p. s[p] == "yes" || n[p] == 7')
    d = parse_domain("int:0..2;str:a,b,", p, phi)
    assert d.ints == (0, 1, 2) and d.strings == ("a", "b", "")
    d = parse_domain("int:3,5;n=9", p, phi)
    assert d.ints == (3, 5) and d.values("n", p.sorts["n"]) == (9,)
    lex = parse_domain("lexicon", p, phi)
    assert {"x", "yes"} <= set(lex.strings) and 7 in lex.ints
    with pytest.raises(ValueError):
        parse_domain("float:1", p, phi)
