"""Concrete interpreter and finite-domain brute-force oracles.

The oracles enumerate every initial store of a :class:`FiniteDomain`, run the
program, and decide HyperLTL satisfaction, full transparency and repair
betterness directly from the definitions.  They are the reference the symbolic
encodings are tested against.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .lang import formula as F
from .lang.expr import Const, Sort, Var, evaluate, walk
from .lang.program import (
    Assign, If, Observe, Program, Seq, Skip, While, literals,
)

DEFAULT_FUEL = 10_000
MAX_STORES = 1_000_000


class Inconclusive(Exception):
    """Some enumerated execution ran out of fuel."""

    def __init__(self, store, fuel: int):
        super().__init__(f"execution from {dict(store)} exceeded fuel {fuel}")
        self.store = store
        self.fuel = fuel


@dataclass(frozen=True)
class ObsSeq:
    stores: tuple  # tuple of stores, each a tuple of (name, value) pairs in declaration order
    terminated: bool

    def __len__(self) -> int:
        return len(self.stores)

    def __getitem__(self, i: int) -> dict:
        return dict(self.stores[i])

    def project(self, names: Sequence[str]) -> tuple:
        return tuple(tuple(dict(s)[n] for n in names) for s in self.stores)


def _freeze(store: Mapping, order: Sequence[str]) -> tuple:
    return tuple((n, store[n]) for n in order)


def run_obs(p: Program, store: Mapping, fuel: int = DEFAULT_FUEL) -> ObsSeq:
    """Execute ``p`` from ``store`` and return the observation sequence.

    Each executed statement costs one unit of fuel; running out yields a
    sequence flagged as not terminated rather than an error.
    """
    if fuel < 1:
        raise ValueError("fuel must be positive")
    order = [n for n, _ in p.decls]
    missing = set(order) - set(store)
    if missing:
        raise ValueError(f"store is missing variables {sorted(missing)}")
    env = {n: store[n] for n in order}
    obs = []
    stack: list = [p.body]
    steps = 0
    while stack:
        if steps >= fuel:
            return ObsSeq(tuple(obs), False)
        s = stack.pop()
        if isinstance(s, Seq):
            stack.extend(reversed(s.stmts))
            continue
        steps += 1
        if isinstance(s, Skip):
            pass
        elif isinstance(s, Observe):
            obs.append(_freeze(env, order))
        elif isinstance(s, Assign):
            env[s.var.name] = evaluate(s.expr, env)
        elif isinstance(s, If):
            stack.append(s.then if evaluate(s.cond, env) else s.orelse)
        elif isinstance(s, While):
            if evaluate(s.cond, env):
                stack.append(s)
                stack.append(s.body)
        else:
            raise TypeError(f"cannot execute {type(s).__name__}")
    return ObsSeq(tuple(obs), True)


# -- finite domains ------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteDomain:
    ints: tuple = (0, 1, 2)
    strings: tuple = ("",)
    bools: tuple = (False, True)
    overrides: tuple = ()  # ((var name, tuple of values), ...)

    def values(self, name: str, sort: Sort) -> tuple:
        for n, vals in self.overrides:
            if n == name:
                return tuple(vals)
        return {Sort.INT: self.ints, Sort.STRING: self.strings, Sort.BOOL: self.bools}[sort]

    def size(self, p: Program) -> int:
        total = 1
        for n, s in p.decls:
            total *= len(self.values(n, s))
        return total

    def stores(self, p: Program) -> Iterable[dict]:
        """All initial stores in canonical (lexicographic by declaration) order."""
        n = self.size(p)
        if n > MAX_STORES:
            raise ValueError(f"domain has {n} stores, more than the limit of {MAX_STORES}")
        names = [v for v, _ in p.decls]
        pools = []
        for v, s in p.decls:
            vals = self.values(v, s)
            if not vals:
                raise ValueError(f"empty value set for variable '{v}'")
            pools.append(vals)
        for combo in itertools.product(*pools):
            yield dict(zip(names, combo))

    @classmethod
    def int_range(cls, lo: int, hi: int, **kw) -> "FiniteDomain":
        return cls(ints=tuple(range(lo, hi + 1)), **kw)


def lexicon(p: Program, phi: Optional[F.HyperLTL] = None) -> tuple:
    """String literals of program and formula, "", and all two-lexeme concatenations."""
    consts = {c.value for c in literals(p) if c.sort == Sort.STRING}
    if phi is not None:
        for a in phi.atoms():
            consts |= {n.value for n in walk(a) if isinstance(n, Const) and n.sort == Sort.STRING}
    base = sorted(consts | {""})
    words = set(base)
    words |= {a + b for a in base for b in base}
    return tuple(sorted(words))


def int_literals(p: Program, phi: Optional[F.HyperLTL] = None) -> set:
    out = {c.value for c in literals(p) if c.sort == Sort.INT}
    if phi is not None:
        for a in phi.atoms():
            out |= {n.value for n in walk(a) if isinstance(n, Const) and n.sort == Sort.INT}
    return out


def parse_domain(spec: str, p: Program, phi: Optional[F.HyperLTL] = None) -> FiniteDomain:
    """Parse a domain description.

    ``lexicon`` uses Int [0,2] plus program literals and the string lexicon;
    otherwise a ``;``-separated list of ``int:lo..hi``, ``int:1,5,9``,
    ``str:a,b,`` (trailing comma adds ""), ``var=v1,v2`` and ``+literals``.
    """
    spec = spec.strip()
    if spec == "lexicon":
        ints = sorted(set(range(0, 3)) | int_literals(p, phi))
        return FiniteDomain(ints=tuple(ints), strings=lexicon(p, phi))
    ints: tuple = (0, 1, 2)
    strings: tuple = ("",)
    overrides = []
    add_literals = False
    for part in filter(None, (x.strip() for x in spec.split(";"))):
        if part == "+literals":
            add_literals = True
        elif part.startswith("int:"):
            body = part[4:]
            if ".." in body:
                lo, hi = body.split("..")
                ints = tuple(range(int(lo), int(hi) + 1))
            else:
                ints = tuple(int(x) for x in body.split(","))
        elif part.startswith("str:"):
            strings = tuple(x for x in part[4:].split(","))
        elif part == "str=lexicon":
            strings = lexicon(p, phi)
        elif "=" in part:
            name, vals = part.split("=", 1)
            sort = p.sorts.get(name)
            if sort is None:
                raise ValueError(f"domain names unknown variable '{name}'")
            raw = vals.split(",")
            conv = {Sort.INT: int, Sort.STRING: str, Sort.BOOL: lambda x: x == "true"}[sort]
            overrides.append((name, tuple(conv(x) for x in raw)))
        else:
            raise ValueError(f"cannot parse domain component '{part}'")
    if add_literals:
        ints = tuple(sorted(set(ints) | int_literals(p, phi)))
    return FiniteDomain(ints=ints, strings=strings, overrides=tuple(overrides))


# -- trace sets --------------------------------------------------------------------

@dataclass
class TraceTable:
    """Observation sequences of a program for every store of a domain."""

    program: Program
    runs: list = field(default_factory=list)  # [(store, ObsSeq)]

    @classmethod
    def build(cls, p: Program, dom: FiniteDomain, fuel: int = DEFAULT_FUEL) -> "TraceTable":
        t = cls(p)
        for st in dom.stores(p):
            o = run_obs(p, st, fuel)
            if not o.terminated:
                raise Inconclusive(st, fuel)
            t.runs.append((st, o))
        return t

    def traces(self) -> list:
        seen: dict = {}
        for _, o in self.runs:
            seen.setdefault(o.stores, o)
        return list(seen.values())


def _atom_positions(body: F.Body) -> dict:
    """For each atom, the least position it may be read at and whether later positions matter."""
    out: dict = {}

    def go(b, depth: int, unbounded: bool):
        if isinstance(b, F.Lit):
            lo, unb = out.get(b.atom, (depth, unbounded))
            out[b.atom] = (min(lo, depth), unb or unbounded or lo != depth)
        elif isinstance(b, (F.And, F.Or)):
            for a in b.args:
                go(a, depth, unbounded)
        elif isinstance(b, F.Next):
            go(b.sub, depth + 1, unbounded)
        elif isinstance(b, F.WUntil):
            go(b.left, depth, True)
            go(b.right, depth, True)

    go(body, 0, False)
    return out


def _relevant_vars(body: F.Body, pos: int) -> frozenset:
    names = set()
    for atom, (lo, unbounded) in _atom_positions(body).items():
        if pos == lo or (unbounded and pos >= lo):
            names |= {n.name for n in walk(atom) if isinstance(n, Var)}
    return frozenset(names)


def _project_for(body: F.Body, traces: list) -> list:
    """Deduplicate traces by the variables the body can read at each position."""
    cache: dict = {}
    seen: dict = {}
    for t in traces:
        key = []
        for i, st in enumerate(t.stores):
            rel = cache.get(i)
            if rel is None:
                rel = cache[i] = _relevant_vars(body, i)
            key.append(tuple((n, v) for n, v in st if n in rel))
        seen.setdefault(tuple(key), t)
    return list(seen.values())


def _word(body_atoms: list, assignment: Mapping[str, ObsSeq]) -> list:
    n = min((len(t) for t in assignment.values()), default=0)
    word = []
    for i in range(n):
        env = {}
        for tv, t in assignment.items():
            for name, val in t.stores[i]:
                env[f"{name}!{tv}"] = val
        word.append({a: bool(evaluate(a, env)) for a in body_atoms})
    return word


def satisfies_body(body: F.Body, assignment: Mapping[str, ObsSeq]) -> bool:
    """``assignment, 0 |= body`` with the shortest-trace rule."""
    return F.evaluate_word(body, _word(F.atoms(body), assignment))


def check_traces(phi: F.HyperLTL, traces: list) -> bool:
    body = phi.body
    atoms = F.atoms(body)
    pool = _project_for(body, traces)

    def go(k: int, assignment: dict) -> bool:
        if k == len(phi.prefix):
            return F.evaluate_word(body, _word(atoms, assignment))
        q, tv = phi.prefix[k]
        if q == "forall":
            return all(go(k + 1, {**assignment, tv: t}) for t in pool)
        return any(go(k + 1, {**assignment, tv: t}) for t in pool)

    return go(0, {})


def oracle_check_hyperltl(p: Program, phi: F.HyperLTL, dom: FiniteDomain,
                          fuel: int = DEFAULT_FUEL) -> bool:
    """Decide ``p |= phi`` with quantifiers ranging over the traces of ``dom``.

    Raises :class:`Inconclusive` if an execution does not terminate within ``fuel``.
    """
    return check_traces(phi, TraceTable.build(p, dom, fuel).traces())


# -- output preservation ------------------------------------------------------------

def outputs_equal(a: ObsSeq, b: ObsSeq, outputs: Sequence[str]) -> bool:
    """Position-wise equality on the output projection; differing lengths count as different."""
    return len(a) == len(b) and a.project(outputs) == b.project(outputs)


def outputs_equal_truncated(a: ObsSeq, b: ObsSeq, outputs: Sequence[str]) -> bool:
    """Equality up to the shorter sequence, as the symbolic encodings compare."""
    n = min(len(a), len(b))
    return a.project(outputs)[:n] == b.project(outputs)[:n]


def _runs(p: Program, dom: FiniteDomain, fuel: int) -> list:
    return TraceTable.build(p, dom, fuel).runs


def store_key(st: Mapping) -> tuple:
    return tuple(sorted(st.items()))


def oracle_preserved_inputs(p: Program, q: Program, outputs: Optional[Sequence[str]],
                            dom: FiniteDomain, fuel: int = DEFAULT_FUEL) -> list:
    """Stores on which ``p`` and ``q`` produce equal output observations, canonically ordered."""
    outputs = tuple(outputs or p.output_vars)
    rp = _runs(p, dom, fuel)
    rq = _runs(q, dom, fuel)
    return [st for (st, a), (_, b) in zip(rp, rq) if outputs_equal(a, b, outputs)]


def violating_inputs(p: Program, phi: F.HyperLTL, dom: FiniteDomain,
                     fuel: int = DEFAULT_FUEL) -> set:
    """Stores taking part in some n-tuple of ``p``-traces that violates the body (universal phi)."""
    if not phi.universal:
        raise ValueError("violations are only defined for universally quantified formulas")
    runs = _runs(p, dom, fuel)
    n = len(phi.prefix)
    names = phi.trace_vars
    by_trace: dict = {}
    for st, o in runs:
        by_trace.setdefault(o.stores, (o, []))[1].append(store_key(st))
    groups = list(by_trace.values())
    bad: set = set()
    for combo in itertools.product(range(len(groups)), repeat=n):
        assignment = {names[j]: groups[c][0] for j, c in enumerate(combo)}
        if not satisfies_body(phi.body, assignment):
            for c in combo:
                bad.update(groups[c][1])
    return bad


def oracle_fully_transparent(p: Program, q: Program, phi: F.HyperLTL, dom: FiniteDomain,
                             outputs: Optional[Sequence[str]] = None,
                             fuel: int = DEFAULT_FUEL, truncated: bool = False) -> bool:
    """Brute-force check of full transparency of repair ``q`` for ``(p, phi)``.

    ``truncated`` compares outputs only up to the shorter observation sequence.
    """
    outputs = tuple(outputs or p.output_vars)
    if not oracle_check_hyperltl(q, phi, dom, fuel):
        return False
    same = outputs_equal_truncated if truncated else outputs_equal
    bad = violating_inputs(p, phi, dom, fuel)
    for (st, a), (_, b) in zip(_runs(p, dom, fuel), _runs(q, dom, fuel)):
        if not same(a, b, outputs) and store_key(st) not in bad:
            return False
    return True


def oracle_better(p: Program, s: Program, q: Program, phi: F.HyperLTL, dom: FiniteDomain,
                  outputs: Optional[Sequence[str]] = None, fuel: int = DEFAULT_FUEL,
                  truncated: bool = False) -> bool:
    """Brute-force check that ``q`` is a better repair than ``s`` for ``(p, phi)``."""
    outputs = tuple(outputs or p.output_vars)
    if not oracle_check_hyperltl(q, phi, dom, fuel):
        return False
    same = outputs_equal_truncated if truncated else outputs_equal
    rp, rs, rq = _runs(p, dom, fuel), _runs(s, dom, fuel), _runs(q, dom, fuel)
    strict = False
    for (_, a), (_, b), (_, c) in zip(rp, rs, rq):
        q_same = same(a, c, outputs)
        s_same = same(a, b, outputs)
        if not q_same and s_same:
            return False
        if q_same and not s_same:
            strict = True
    return strict


def length_divergent(programs: Sequence[Program], dom: FiniteDomain,
                     fuel: int = DEFAULT_FUEL) -> bool:
    """True if two of the programs produce observation sequences of different length on some store."""
    tables = [_runs(x, dom, fuel) for x in programs]
    for row in zip(*tables):
        if len({len(o) for _, o in row}) > 1:
            return True
    return False


def to_json(obj) -> str:
    """Deterministic JSON for verdicts and store sets."""
    if isinstance(obj, list) and obj and isinstance(obj[0], dict):
        obj = sorted((dict(sorted(s.items())) for s in obj), key=lambda d: json.dumps(d, sort_keys=True))
    return json.dumps(obj, sort_keys=True, indent=2)
