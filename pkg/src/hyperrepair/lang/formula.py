"""HyperLTL formulas restricted to the safety fragment (negation only on atoms)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .expr import Expr, Var, walk


@dataclass(frozen=True)
class LTrue:
    pass


@dataclass(frozen=True)
class LFalse:
    pass


@dataclass(frozen=True)
class Lit:
    """Theory predicate ``atom`` (a Bool expression over indexed variables), possibly negated."""

    atom: Expr
    positive: bool = True


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Next:
    sub: "Body"


@dataclass(frozen=True)
class WUntil:
    left: "Body"
    right: "Body"


Body = Union[LTrue, LFalse, Lit, And, Or, Next, WUntil]

TT = LTrue()
FF = LFalse()


def land(*args: Body) -> Body:
    flat: list = []
    for a in args:
        if a == TT:
            continue
        if a == FF:
            return FF
        flat.extend(a.args if isinstance(a, And) else (a,))
    if not flat:
        return TT
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def lor(*args: Body) -> Body:
    flat: list = []
    for a in args:
        if a == FF:
            continue
        if a == TT:
            return TT
        flat.extend(a.args if isinstance(a, Or) else (a,))
    if not flat:
        return FF
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def globally(sub: Body) -> Body:
    return WUntil(sub, FF)


@dataclass(frozen=True)
class HyperLTL:
    prefix: tuple  # (("forall" | "exists", trace_var), ...)
    body: Body

    @property
    def trace_vars(self) -> list:
        return [t for _, t in self.prefix]

    @property
    def universal(self) -> bool:
        return all(q == "forall" for q, _ in self.prefix)

    @property
    def existential(self) -> bool:
        return all(q == "exists" for q, _ in self.prefix)

    def atoms(self) -> list:
        return atoms(self.body)

    def program_vars(self) -> set:
        """Names of program variables mentioned by atoms."""
        return {n.name for a in self.atoms() for n in walk(a) if isinstance(n, Var)}


def subformulas(b: Body) -> list:
    out = [b]
    if isinstance(b, (And, Or)):
        for a in b.args:
            out.extend(subformulas(a))
    elif isinstance(b, Next):
        out.extend(subformulas(b.sub))
    elif isinstance(b, WUntil):
        out.extend(subformulas(b.left))
        out.extend(subformulas(b.right))
    return out


def atoms(b: Body) -> list:
    """Distinct atoms in order of first occurrence."""
    seen: dict = {}
    for s in subformulas(b):
        if isinstance(s, Lit):
            seen.setdefault(s.atom, None)
    return list(seen)


def is_safety_nnf(b: Body) -> bool:
    return all(isinstance(s, (LTrue, LFalse, Lit, And, Or, Next, WUntil)) for s in subformulas(b))


def evaluate_word(b: Body, word, i: int = 0) -> bool:
    """Direct evaluation on a finite word of letters (``atom -> bool`` mappings).

    Positions at or beyond the end of the word satisfy everything.
    """
    if i >= len(word):
        return True
    if isinstance(b, LTrue):
        return True
    if isinstance(b, LFalse):
        return False
    if isinstance(b, Lit):
        return word[i][b.atom] == b.positive
    if isinstance(b, And):
        return all(evaluate_word(a, word, i) for a in b.args)
    if isinstance(b, Or):
        return any(evaluate_word(a, word, i) for a in b.args)
    if isinstance(b, Next):
        return evaluate_word(b.sub, word, i + 1)
    if isinstance(b, WUntil):
        for j in range(i, len(word)):
            if evaluate_word(b.right, word, j):
                return True
            if not evaluate_word(b.left, word, j):
                return False
        return True
    raise TypeError(f"not a safety body: {b!r}")
