"""Constraint encodings over symbolic paths: acceptance, HyperLTL satisfaction,
full transparency and iterative improvement.

Indexed copies of a program variable ``x`` for trace variable ``pi`` are the
variables ``x!pi``.  The transparency and improvement encodings quantify the
shared input as ``x!in`` (universal blocks) and ``x!wit`` (existential blocks).
"""

from __future__ import annotations

import itertools
from typing import Mapping, Optional, Sequence

from .automaton import Nsa, ltl_to_nsa
from .lang import formula as F
from .lang.expr import (
    Call, Expr, TRUE, Var, conj, disj, free_vars, implies, index, mk, neg, quant, substitute, walk,
)
from .smt import check_sat, symbol, to_smtlib
from .symexec import SymbolicPath

UNIVERSAL_INPUT = "in"
WITNESS_INPUT = "wit"


def _lookup(beta: Sequence, i: int, name: str) -> Expr:
    for n, e in beta[i]:
        if n == name:
            return e
    raise KeyError(f"observation {i} has no variable '{name}'")


def build_acc(a: Nsa, delta: Mapping[str, Sequence]) -> Expr:
    """Acceptance of the observation sequences in ``delta`` by ``a`` (shortest-trace rule).

    Sub-terms for (state, step) pairs are memoized, so the result is a DAG.
    """
    if not delta:
        raise ValueError("acceptance needs at least one trace")
    minlen = min(len(b) for b in delta.values())
    if minlen == 0:
        return TRUE
    atom_vars = {v for atom in a.atoms for v in walk(atom) if isinstance(v, Var)}
    for v in atom_vars:
        if v.trace not in delta:
            raise ValueError(f"atom variable {v.key} refers to an unassigned trace")
    literal_cache: dict = {}

    def literal(k: int, i: int, positive: bool) -> Expr:
        key = (k, i)
        inst = literal_cache.get(key)
        if inst is None:
            mapping = {v: index(_lookup(delta[v.trace], i, v.name), v.trace) for v in atom_vars}
            inst = literal_cache[key] = substitute(a.atoms[k], mapping)
        return inst if positive else neg(inst)

    memo: dict = {}

    def acc(q: int, i: int) -> Expr:
        if i >= minlen:
            return TRUE
        hit = memo.get((q, i))
        if hit is not None:
            return hit
        options = []
        for cube, dst in a.edges_from(q):
            options.append(conj(acc(dst, i + 1), *(literal(k, i, v) for k, v in cube)))
        out = memo[(q, i)] = disj(*options)
        return out

    return disj(*(acc(q, 0) for q in a.initial))


def _indexed_vars(variables: Sequence[Var], trace: str) -> tuple:
    return tuple(Var(v.name, v.sort, trace) for v in variables)


def build_enc(phi: F.HyperLTL, paths: Sequence[SymbolicPath], variables: Sequence[Var],
              nsa: Optional[Nsa] = None) -> Expr:
    """HyperLTL satisfaction over the symbolic paths, resolving each quantifier on ``paths``."""
    a = nsa or ltl_to_nsa(phi.body)
    paths = list(paths)

    def go(k: int, delta: dict) -> Expr:
        if k == len(phi.prefix):
            return build_acc(a, delta)
        q, tv = phi.prefix[k]
        parts = []
        for p in paths:
            alpha = index(p.alpha, tv)
            rest = go(k + 1, {**delta, tv: p.beta})
            parts.append(implies(alpha, rest) if q == "forall" else conj(alpha, rest))
        body = conj(*parts) if q == "forall" else disj(*parts)
        return quant(q, _indexed_vars(variables, tv), body)

    return go(0, {})


def _mismatch(b1, b2, outputs: Sequence[str], trace: str) -> Expr:
    n = min(len(b1), len(b2))
    return disj(*(
        mk("!=", index(_lookup(b1, i, x), trace), index(_lookup(b2, i, x), trace))
        for i in range(n) for x in outputs
    ))


def _match(b1, b2, outputs: Sequence[str], trace: str) -> Expr:
    n = min(len(b1), len(b2))
    return conj(*(
        mk("==", index(_lookup(b1, i, x), trace), index(_lookup(b2, i, x), trace))
        for i in range(n) for x in outputs
    ))


def choices_contradict(c1: tuple, c2: tuple) -> bool:
    """Two paths of the same skeleton exclude each other if they first diverge at a hole-free branch."""
    for (b1, h1), (b2, h2) in zip(c1, c2):
        if b1 != b2:
            return not (h1 or h2)
    return False


def _compatible(paths: Sequence[SymbolicPath], shared: bool, solver_check: bool, trace: str) -> bool:
    if shared:
        for x, y in itertools.combinations(paths, 2):
            if choices_contradict(x.choices, y.choices):
                return False
    if solver_check:
        alpha = conj(*(index(p.alpha, trace) for p in paths))
        if check_sat(alpha, timeout=5.0).status == "unsat":
            return False
    return True


def build_trans(phi: F.HyperLTL, paths_p: Sequence[SymbolicPath], paths_q: Sequence[SymbolicPath],
                outputs: Sequence[str], variables: Sequence[Var], nsa: Optional[Nsa] = None,
                shared: bool = False) -> Expr:
    """Full transparency of the repair whose paths are ``paths_q`` (universal formulas only)."""
    if not phi.universal:
        raise ValueError("full transparency is only defined for universally quantified formulas")
    if not outputs:
        raise ValueError("the output set must be nonempty")
    a = nsa or ltl_to_nsa(phi.body)
    x_in = _indexed_vars(variables, UNIVERSAL_INPUT)
    premise = disj(*(
        conj(index(pp.alpha, UNIVERSAL_INPUT), index(pq.alpha, UNIVERSAL_INPUT),
             _mismatch(pp.beta, pq.beta, outputs, UNIVERSAL_INPUT))
        for pp in paths_p for pq in paths_q
        if not shared or not choices_contradict(pp.choices, pq.choices)
    ))
    tvs = phi.trace_vars
    witnesses = []
    for combo in itertools.product(paths_p, repeat=len(tvs)):
        alphas = [index(p.alpha, tv) for p, tv in zip(combo, tvs)]
        pick = disj(*(
            conj(*(mk("==", xi, Var(xi.name, xi.sort, tv)) for xi in x_in)) for tv in tvs
        ))
        violated = neg(build_acc(a, {tv: p.beta for p, tv in zip(combo, tvs)}))
        witnesses.append(conj(*alphas, pick, violated))
    block = tuple(v for tv in tvs for v in _indexed_vars(variables, tv))
    conclusion = quant("exists", block, disj(*witnesses))
    return quant("forall", x_in, implies(premise, conclusion))


def build_iter(paths_p: Sequence[SymbolicPath], paths_s: Sequence[SymbolicPath],
               paths_q: Sequence[SymbolicPath], outputs: Sequence[str], variables: Sequence[Var],
               shared: bool = False, solver_prune: bool = False) -> Expr:
    """Strict improvement of the ``paths_q`` repair over the ``paths_s`` repair w.r.t. ``paths_p``.

    With ``shared`` the three sets are instantiations of one skeleton path list
    (same order, same branch-choice records) and triples that diverge first at a
    hole-free branch are dropped.
    """
    if not outputs:
        raise ValueError("the output set must be nonempty")
    triples = [
        t for t in itertools.product(paths_p, paths_s, paths_q)
        if _compatible(t, shared, solver_prune, UNIVERSAL_INPUT)
    ]
    u = UNIVERSAL_INPUT
    keep = conj(*(
        implies(
            conj(index(pp.alpha, u), index(ps.alpha, u), index(pq.alpha, u), _mismatch(pp.beta, pq.beta, outputs, u)),
            _mismatch(pp.beta, ps.beta, outputs, u),
        )
        for pp, ps, pq in triples
    ))
    w = WITNESS_INPUT
    gain = disj(*(
        conj(index(pp.alpha, w), index(ps.alpha, w), index(pq.alpha, w),
             _mismatch(pp.beta, ps.beta, outputs, w), _match(pp.beta, pq.beta, outputs, w))
        for pp, ps, pq in triples
    ))
    return conj(
        quant("forall", _indexed_vars(variables, u), keep),
        quant("exists", _indexed_vars(variables, w), gain),
    )


def synthesis_symbols(e: Expr) -> dict:
    """``name -> (argument sorts, return sort)`` for every synthesis symbol in ``e``."""
    out: dict = {}
    for c in walk(e, unique=True):
        if isinstance(c, Call):
            out.setdefault(c.name, (tuple(a.sort for a in c.args), c.sort))
    return out


def smtlib_script(e: Expr, comment: str = "") -> str:
    """A standalone SMT-LIB 2 script asserting ``e`` (free variables and symbols declared)."""
    lines = [f"; {comment}"] if comment else []
    lines.append("(set-logic ALL)")
    for name, (args, ret) in sorted(synthesis_symbols(e).items()):
        lines.append(f"(declare-fun {symbol(name)} ({' '.join(str(s) for s in args)}) {ret})")
    for v in sorted(free_vars(e), key=lambda v: v.key):
        lines.append(f"(declare-const {symbol(v.key)} {v.sort})")
    lines.append(f"(assert {to_smtlib(e)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
