"""SMT-LIB 2 printing/parsing of expression terms and z3-backed decision procedures."""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from typing import Mapping, Optional

import z3

from .lang.expr import (
    Call, Const, Expr, Op, Quant, Sort, SortError, Var, children, conj, mk, neg,
)

# -- printing -------------------------------------------------------------------------

_SMT_OPS = {
    "+": "+", "-": "-", "*": "*", "neg": "-", "++": "str.++", "<": "<", "<=": "<=", ">": ">",
    ">=": ">=", "==": "=", "&&": "and", "||": "or", "=>": "=>", "!": "not", "ite": "ite",
}

_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*$")


def symbol(name: str) -> str:
    return name if _SIMPLE.match(name) else "|" + name + "|"


def smt_string(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('""')
        elif 32 <= ord(ch) < 127:
            out.append(ch)
        else:
            out.append("\\u{%x}" % ord(ch))
    return '"' + "".join(out) + '"'


def to_smtlib(e: Expr) -> str:
    """Render a term as an SMT-LIB s-expression; shared subterms are printed in full."""
    memo: dict = {}

    def go(n: Expr) -> str:
        hit = memo.get(id(n))
        if hit is not None:
            return hit[1]
        if isinstance(n, Const):
            if n.sort == Sort.BOOL:
                s = "true" if n.value else "false"
            elif n.sort == Sort.STRING:
                s = smt_string(n.value)
            else:
                s = str(n.value) if n.value >= 0 else f"(- {-n.value})"
        elif isinstance(n, Var):
            s = symbol(n.key)
        elif isinstance(n, Call):
            s = f"({symbol(n.name)} {' '.join(go(a) for a in n.args)})" if n.args else symbol(n.name)
        elif isinstance(n, Op):
            if n.op == "!=":
                s = f"(not (= {go(n.args[0])} {go(n.args[1])}))"
            else:
                s = f"({_SMT_OPS[n.op]} {' '.join(go(a) for a in n.args)})"
        elif isinstance(n, Quant):
            vs = " ".join(f"({symbol(v.key)} {v.sort})" for v in n.vars)
            s = f"({n.kind} ({vs}) {go(n.body)})"
        else:
            raise TypeError(n)
        memo[id(n)] = (n, s)
        return s

    return go(e)


# -- s-expressions ----------------------------------------------------------------------

_TOKEN = re.compile(r'\s*(?:(;[^\n]*)|(\()|(\))|("(?:[^"]|"")*")|(\|[^|]*\|)|([^\s()";|]+))')


class SExprError(ValueError):
    pass


@dataclass(frozen=True)
class StrLit:
    value: str


def parse_sexprs(text: str) -> list:
    """Parse a sequence of s-expressions into nested lists of atoms (str) and StrLit."""
    pos = 0
    stack: list = [[]]
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise SExprError(f"cannot tokenize near {text[pos:pos + 20]!r}")
        pos = m.end()
        comment, lp, rp, string, quoted, atom = m.groups()
        if comment:
            continue
        if lp:
            stack.append([])
        elif rp:
            if len(stack) == 1:
                raise SExprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        elif string:
            stack[-1].append(StrLit(_unescape(string[1:-1].replace('""', '"'))))
        elif quoted:
            stack[-1].append(quoted[1:-1])
        elif atom:
            stack[-1].append(atom)
    if len(stack) != 1:
        raise SExprError("unbalanced '('")
    return stack[0]


def _unescape(s: str) -> str:
    return re.sub(r"\\u\{([0-9a-fA-F]+)\}", lambda m: chr(int(m.group(1), 16)), s)


_SORTS = {"Int": Sort.INT, "Bool": Sort.BOOL, "String": Sort.STRING}
_FROM_SMT = {
    "+": "+", "*": "*", "str.++": "++", "<": "<", "<=": "<=", ">": ">", ">=": ">=",
    "and": "&&", "or": "||", "=>": "=>", "not": "!", "ite": "ite",
}


def parse_sort(s) -> Sort:
    if not isinstance(s, str) or s not in _SORTS:
        raise SExprError(f"unsupported sort {s!r}")
    return _SORTS[s]


def term_from_sexpr(sx, scope: Mapping[str, Var], functions: Optional[Mapping[str, tuple]] = None) -> Expr:
    """Build an expression from a parsed s-expression.

    ``scope`` maps symbols to variables; ``functions`` maps synthesis symbols to
    ``(arg sorts, return sort)``.
    """
    functions = functions or {}

    def go(x, sc):
        if isinstance(x, StrLit):
            return Const(x.value, Sort.STRING)
        if isinstance(x, str):
            if x == "true":
                return Const(True, Sort.BOOL)
            if x == "false":
                return Const(False, Sort.BOOL)
            if re.fullmatch(r"\d+", x):
                return Const(int(x), Sort.INT)
            if x in sc:
                return sc[x]
            if x in functions and not functions[x][0]:
                return Call(x, (), functions[x][1])
            raise SExprError(f"unknown symbol '{x}'")
        if not x:
            raise SExprError("empty application")
        head = x[0]
        if head in ("forall", "exists"):
            bound = []
            inner = dict(sc)
            for name, srt in x[1]:
                v = _var_from_symbol(name, parse_sort(srt))
                bound.append(v)
                inner[name] = v
            return Quant(head, tuple(bound), go(x[2], inner))
        if head == "let":
            inner = dict(sc)
            for name, val in x[1]:
                inner[name] = go(val, sc)
            return go(x[2], inner)
        args = [go(a, sc) for a in x[1:]]
        if head == "-":
            if len(args) == 1:
                if isinstance(args[0], Const):
                    return Const(-args[0].value, Sort.INT)
                return mk("neg", args[0])
            return _fold("-", args)
        if head == "=":
            if len(args) != 2:
                return conj(*(mk("==", a, b) for a, b in zip(args, args[1:])))
            return mk("==", *args)
        if head == "distinct" and len(args) == 2:
            return mk("!=", *args)
        if head in ("and", "or"):
            if len(args) == 1:
                return args[0]
            return mk(_FROM_SMT[head], *args)
        if head in ("+", "*", "str.++") and len(args) > 2:
            return _fold(_FROM_SMT[head], args)
        if head in _FROM_SMT:
            return mk(_FROM_SMT[head], *args)
        if isinstance(head, str) and head in functions:
            sorts, ret = functions[head]
            if [a.sort for a in args] != list(sorts):
                raise SortError(f"ill-sorted application of '{head}'")
            return Call(head, tuple(args), ret)
        raise SExprError(f"unsupported operator {head!r}")

    return go(sx, dict(scope))


def _fold(op, args):
    out = args[0]
    for a in args[1:]:
        out = mk(op, out, a)
    return out


def _var_from_symbol(name: str, sort: Sort) -> Var:
    if "!" in name:
        base, trace = name.split("!", 1)
        return Var(base, sort, trace)
    return Var(name, sort)


def var_from_symbol(name: str, sort: Sort) -> Var:
    return _var_from_symbol(name, sort)


# -- z3 ---------------------------------------------------------------------------------

class Z3Translator:
    """Converts terms to z3; variables and synthesis symbols become z3 constants/functions."""

    def __init__(self, ctx: Optional[z3.Context] = None):
        self.ctx = ctx or z3.Context()
        self.consts: dict = {}
        self.funcs: dict = {}

    def sort(self, s: Sort):
        if s == Sort.INT:
            return z3.IntSort(self.ctx)
        if s == Sort.BOOL:
            return z3.BoolSort(self.ctx)
        return z3.StringSort(self.ctx)

    def var(self, v: Var):
        key = (v.key, v.sort)
        c = self.consts.get(key)
        if c is None:
            c = self.consts[key] = z3.Const(v.key, self.sort(v.sort))
        return c

    def func(self, c: Call):
        key = (c.name, tuple(a.sort for a in c.args), c.sort)
        f = self.funcs.get(key)
        if f is None:
            f = self.funcs[key] = z3.Function(c.name, *[self.sort(a.sort) for a in c.args], self.sort(c.sort))
        return f

    def __call__(self, e: Expr):
        memo: dict = {}
        ctx = self.ctx

        def go(n):
            hit = memo.get(id(n))
            if hit is not None:
                return hit[1]
            if isinstance(n, Const):
                if n.sort == Sort.BOOL:
                    r = z3.BoolVal(n.value, ctx)
                elif n.sort == Sort.INT:
                    r = z3.IntVal(n.value, ctx)
                else:
                    r = z3.StringVal(n.value, ctx)
            elif isinstance(n, Var):
                r = self.var(n)
            elif isinstance(n, Call):
                f = self.func(n)
                r = f(*[go(a) for a in n.args]) if n.args else f()
            elif isinstance(n, Quant):
                bound = [self.var(v) for v in n.vars]
                q = z3.ForAll if n.kind == "forall" else z3.Exists
                r = q(bound, go(n.body))
            else:
                a = [go(x) for x in n.args]
                op = n.op
                if op == "+":
                    r = a[0] + a[1]
                elif op == "-":
                    r = a[0] - a[1]
                elif op == "*":
                    r = a[0] * a[1]
                elif op == "neg":
                    r = -a[0]
                elif op == "++":
                    r = z3.Concat(a[0], a[1])
                elif op == "<":
                    r = a[0] < a[1]
                elif op == "<=":
                    r = a[0] <= a[1]
                elif op == ">":
                    r = a[0] > a[1]
                elif op == ">=":
                    r = a[0] >= a[1]
                elif op == "==":
                    r = a[0] == a[1]
                elif op == "!=":
                    r = a[0] != a[1]
                elif op == "&&":
                    r = z3.And(*a)
                elif op == "||":
                    r = z3.Or(*a)
                elif op == "=>":
                    r = z3.Implies(a[0], a[1])
                elif op == "!":
                    r = z3.Not(a[0])
                elif op == "ite":
                    r = z3.If(a[0], a[1], a[2])
                else:
                    raise ValueError(f"no z3 translation for {op}")
            memo[id(n)] = (n, r)
            return r

        return go(e)


@dataclass
class Verdict:
    status: str  # "sat" | "unsat" | "unknown"
    elapsed: float
    reason: str = ""

    def __bool__(self):
        raise TypeError("use .status; an unknown verdict must not be coerced to a boolean")


def check_sat(e: Expr, timeout: Optional[float] = 30.0) -> Verdict:
    """Satisfiability of ``e`` (free variables existential, synthesis symbols uninterpreted)."""
    tr = Z3Translator()
    s = z3.Solver(ctx=tr.ctx)
    if timeout is not None:
        s.set("timeout", max(1, int(timeout * 1000)))
    s.add(tr(e))
    t0 = time.monotonic()
    r = s.check()
    dt = time.monotonic() - t0
    if r == z3.sat:
        return Verdict("sat", dt)
    if r == z3.unsat:
        return Verdict("unsat", dt)
    return Verdict("unknown", dt, s.reason_unknown())


def is_valid(e: Expr, timeout: Optional[float] = 30.0) -> Optional[bool]:
    """Validity of a constraint, treating free variables as universal.

    Top-level conjuncts are decided separately: a leading universal block is
    checked through unsatisfiability of its negated body, a leading existential
    block through satisfiability of its body.  Returns None when undecided.
    """
    parts = e.args if isinstance(e, Op) and e.op == "&&" else (e,)
    for part in parts:
        r = _decide_closed(part, timeout)
        if r is not True:
            return r
    return True


def _decide_closed(part: Expr, timeout) -> Optional[bool]:
    from .lang.expr import free_vars

    if isinstance(part, Quant) and part.kind == "exists" and not free_vars(part):
        v = check_sat(part.body, timeout).status
    else:
        body = part.body if isinstance(part, Quant) and part.kind == "forall" else part
        v = {"sat": "unsat", "unsat": "sat", "unknown": "unknown"}[check_sat(neg(body), timeout).status]
    return {"sat": True, "unsat": False}.get(v)


def contains_quantifier(e: Expr) -> bool:
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Quant):
            return True
        stack.extend(children(n))
    return False
