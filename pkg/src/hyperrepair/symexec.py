"""Bounded symbolic execution producing (path condition, symbolic observations) pairs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import z3

from .lang.expr import Call, Expr, TRUE, conj, evaluate, expand_calls, neg, simplify, substitute, walk
from .lang.printer import expr_str
from .lang.program import Assign, If, Observe, Program, Seq, Skip, While
from .smt import Verdict, Z3Translator, check_sat


@dataclass(frozen=True)
class Bounds:
    unroll: int = 3  # maximal number of body executions per loop entry
    max_observe: int = 64
    max_paths: int = 4096

    def __post_init__(self):
        if min(self.unroll, self.max_observe, self.max_paths) < 1:
            raise ValueError("bounds must be positive")

    def deeper(self, factor: int = 2) -> "Bounds":
        return Bounds(self.unroll * factor, self.max_observe * factor, self.max_paths * factor)


@dataclass(frozen=True)
class SymbolicPath:
    alpha: Expr
    beta: tuple  # tuple of symbolic stores; a store is a tuple of (name, Expr) in declaration order
    maximal: bool
    depth_exhausted: bool
    choices: tuple = ()  # ((bit, condition depends on a synthesis symbol), ...)

    def store(self, i: int) -> dict:
        return dict(self.beta[i])

    def __len__(self) -> int:
        return len(self.beta)

    def map_exprs(self, fn) -> "SymbolicPath":
        return SymbolicPath(
            fn(self.alpha),
            tuple(tuple((n, fn(e)) for n, e in st) for st in self.beta),
            self.maximal,
            self.depth_exhausted,
            self.choices,
        )

    def instantiate(self, definitions: Mapping[str, tuple]) -> "SymbolicPath":
        """Replace synthesis symbols by concrete bodies (``name -> (params, body)``)."""
        return self.map_exprs(lambda e: simplify(expand_calls(e, definitions)))

    def concretize(self, store: Mapping) -> list:
        """Observation sequence for a concrete initial store (a list of dicts)."""
        return [{n: evaluate(e, store) for n, e in st} for st in self.beta]

    def holds(self, store: Mapping) -> bool:
        return bool(evaluate(self.alpha, store))


@dataclass
class PathSet:
    paths: list
    truncated: bool = False  # max_paths was hit
    pruning: str = "solver"  # "solver" | "syntactic"
    unknown: int = 0  # branches kept because the solver could not decide

    def __iter__(self):
        return iter(self.paths)

    def __len__(self):
        return len(self.paths)

    @property
    def maximal(self) -> list:
        return [p for p in self.paths if p.maximal]

    @property
    def complete(self) -> bool:
        return not self.truncated and all(p.maximal for p in self.paths)

    def instantiate(self, definitions: Mapping[str, tuple]) -> "PathSet":
        return PathSet([p.instantiate(definitions) for p in self.paths], self.truncated, self.pruning, self.unknown)


def path_satisfiable(alpha: Expr, timeout: Optional[float] = 30.0) -> Verdict:
    """sat / unsat / unknown for a path condition; synthesis symbols are uninterpreted."""
    return check_sat(alpha, timeout)


def _has_call(e: Expr) -> bool:
    return any(isinstance(n, Call) for n in walk(e, unique=True))


def explore_paths(p: Program, bounds: Bounds = Bounds(), prune: bool = True,
                  timeout: Optional[float] = 30.0) -> PathSet:
    """Depth-first symbolic execution, then-branch first.

    Paths are returned in exploration order, which is the canonical order by
    branch-choice string.  Unsatisfiable prefixes are pruned with z3 when
    ``prune`` is set; otherwise only syntactically false conditions are dropped.
    """
    order = p.variables
    nu0 = {v: v for v in order}
    result = PathSet([], pruning="solver" if prune else "syntactic")
    tr = Z3Translator() if prune else None
    solver = z3.Solver(ctx=tr.ctx) if prune else None
    if solver is not None and timeout is not None:
        solver.set("timeout", max(1, int(timeout * 1000)))

    def feasible(cond: Expr) -> bool:
        if cond == TRUE:
            return True
        if cond == neg(TRUE):
            return False
        if solver is None:
            return True
        solver.push()
        solver.add(tr(cond))
        r = solver.check()
        solver.pop()
        if r == z3.unknown:
            result.unknown += 1
        return r != z3.unsat

    def freeze(env) -> tuple:
        return tuple((v.name, env[v]) for v in order)

    # depth-first; each call owns its statement stack (top = next statement)
    def run(stack, env, alpha, beta, choices, loops):
        while True:
            if len(result.paths) >= bounds.max_paths:
                result.truncated = True
                return
            if not stack:
                result.paths.append(SymbolicPath(conj(*alpha), tuple(beta), True, False, tuple(choices)))
                return
            s = stack.pop()
            if isinstance(s, Seq):
                stack.extend(reversed(s.stmts))
            elif isinstance(s, Skip):
                pass
            elif isinstance(s, Observe):
                if len(beta) >= bounds.max_observe:
                    result.paths.append(SymbolicPath(conj(*alpha), tuple(beta), False, True, tuple(choices)))
                    return
                beta = beta + [freeze(env)]
            elif isinstance(s, Assign):
                env = {**env, s.var: substitute(s.expr, env)}
            elif isinstance(s, tuple) and s[0] == "exit-loop":
                loops = {k: v for k, v in loops.items() if k != s[1]}
            elif isinstance(s, (If, While)):
                c = substitute(s.cond, env)
                hole = _has_call(c)
                if isinstance(s, If):
                    branches = [(True, [s.then], loops), (False, [s.orelse], loops)]
                else:
                    k = id(s)
                    n = loops.get(k, 0)
                    branches = [
                        (True, [s.body, s], {**loops, k: n + 1}),
                        (False, [("exit-loop", k)], loops),
                    ]
                    if n >= bounds.unroll:
                        branches[0] = (True, None, loops)
                # ``push`` lists statements in execution order
                for bit, push, lp in branches:
                    cond = c if bit else neg(c)
                    if not feasible(cond):
                        continue
                    if push is None:
                        # loop bound reached: record the cut path
                        result.paths.append(SymbolicPath(
                            conj(*alpha, cond), tuple(beta), False, True, tuple(choices) + ((bit, hole),)))
                        continue
                    if solver is not None:
                        solver.push()
                        solver.add(tr(cond))
                    run(stack + push[::-1], env, alpha + [cond], beta, choices + [(bit, hole)], lp)
                    if solver is not None:
                        solver.pop()
                    if len(result.paths) >= bounds.max_paths:
                        result.truncated = True
                        return
                return
            else:
                raise TypeError(f"cannot execute {type(s).__name__}")

    run([p.body], dict(nu0), [], [], [], {})
    return result


def dump_paths(ps: PathSet) -> str:
    lines = []
    for k, path in enumerate(ps.paths):
        stores = "; ".join(
            "[" + ", ".join(f"{n} -> {expr_str(e)}" for n, e in st) + "]" for st in path.beta
        )
        lines.append(
            f"PATH {k}: alpha := {expr_str(path.alpha)}; beta := [{stores}]; "
            f"maximal: {'yes' if path.maximal else 'no'}"
        )
    if ps.truncated:
        lines.append("TRUNCATED: path limit reached")
    return "\n".join(lines) + "\n"
