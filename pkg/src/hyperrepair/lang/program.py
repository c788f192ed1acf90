"""Statements and whole programs of the small imperative language."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .expr import Expr, Sort, SortError, Var, walk


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Observe:
    pass


@dataclass(frozen=True)
class Assign:
    var: Var
    expr: Expr
    loc: Optional[int] = None


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: "Stmt"
    loc: Optional[int] = None


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Stmt"
    loc: Optional[int] = None


@dataclass(frozen=True)
class Seq:
    """Sequential composition of two or more statements (kept flat)."""

    stmts: tuple


Stmt = Union[Skip, Observe, Assign, If, While, Seq]

SKIP = Skip()
OBSERVE = Observe()


def seq(*stmts: Stmt) -> Stmt:
    flat: list = []
    for s in stmts:
        if isinstance(s, Seq):
            flat.extend(s.stmts)
        else:
            flat.append(s)
    if not flat:
        return SKIP
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


@dataclass(frozen=True)
class Program:
    decls: tuple  # ((name, Sort), ...) in declaration order
    body: Stmt
    outputs: tuple = ()  # X_out; empty means "all declared variables"

    @property
    def sorts(self) -> dict:
        return dict(self.decls)

    @property
    def variables(self) -> list:
        return [Var(n, s) for n, s in self.decls]

    @property
    def output_vars(self) -> tuple:
        return self.outputs or tuple(n for n, _ in self.decls)

    def with_body(self, body: Stmt) -> "Program":
        return Program(self.decls, body, self.outputs)


def statements(s: Stmt) -> Iterator[Stmt]:
    """Pre-order walk over statements."""
    yield s
    if isinstance(s, Seq):
        for c in s.stmts:
            yield from statements(c)
    elif isinstance(s, If):
        yield from statements(s.then)
        yield from statements(s.orelse)
    elif isinstance(s, While):
        yield from statements(s.body)


def repair_locations(p: Program) -> list:
    return [s for s in statements(p.body) if getattr(s, "loc", None) is not None]


def literals(p: Program) -> set:
    """All constants appearing in the program body."""
    from .expr import Const

    out = set()
    for s in statements(p.body):
        for e in stmt_exprs(s):
            out |= {n for n in walk(e) if isinstance(n, Const)}
    return out


def stmt_exprs(s: Stmt) -> tuple:
    if isinstance(s, Assign):
        return (s.expr,)
    if isinstance(s, (If, While)):
        return (s.cond,)
    return ()


def check_program(p: Program) -> None:
    """Raise SortError/ValueError if the program is ill-sorted or has duplicate locations."""
    sorts = p.sorts
    for name in p.outputs:
        if name not in sorts:
            raise SortError(f"output variable '{name}' is not declared")
    seen: set = set()
    for s in statements(p.body):
        for e in stmt_exprs(s):
            for n in walk(e):
                if isinstance(n, Var) and sorts.get(n.name) != n.sort:
                    raise SortError(f"variable '{n.name}' used at sort {n.sort}")
        if isinstance(s, Assign) and sorts.get(s.var.name) != s.expr.sort:
            raise SortError(
                f"cannot assign {s.expr.sort} expression to '{s.var.name}' of sort {sorts.get(s.var.name)}"
            )
        if isinstance(s, (If, While)) and s.cond.sort != Sort.BOOL:
            raise SortError(f"guard must be Bool, got {s.cond.sort}")
        loc = getattr(s, "loc", None)
        if loc is not None:
            if loc in seen:
                raise ValueError(f"duplicate repair location id {loc}")
            seen.add(loc)


def map_stmts(s: Stmt, fn) -> Stmt:
    """Rebuild a statement tree bottom-up, applying ``fn`` to every node."""
    if isinstance(s, Seq):
        s = seq(*(map_stmts(c, fn) for c in s.stmts))
    elif isinstance(s, If):
        s = If(s.cond, map_stmts(s.then, fn), map_stmts(s.orelse, fn), s.loc)
    elif isinstance(s, While):
        s = While(s.cond, map_stmts(s.body, fn), s.loc)
    return fn(s)
