"""Recursive-descent parsers for programs and HyperLTL formulas."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional

from . import formula as F
from .expr import Const, Expr, Op, Sort, SortError, Var, mk
from .program import Assign, If, Observe, Program, Skip, While, check_program, seq


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # INT STR ID OP EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*|/\*.*?\*/)
  | (?P<INT>\d+)
  | (?P<STR>"(?:[^"]|"")*")
  | (?P<ID>[A-Za-z_][A-Za-z_0-9']*)
  | (?P<OP><->|->|:=|==|!=|<=|>=|&&|\|\||\+\+|[@<>=!+\-*(){}\[\],;.])
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(text: str) -> list:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            out.append(Token(kind, tok, line, pos - line_start + 1))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = pos + tok.rindex("\n") + 1
        pos = m.end()
    out.append(Token("EOF", "", line, pos - line_start + 1))
    return out


_SORT_KW = {"int": Sort.INT, "bool": Sort.BOOL, "string": Sort.STRING}
_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class _Base:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("OP", "ID") and t.text in texts

    def eat(self, *texts: str) -> Optional[Token]:
        if self.at(*texts):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.eat(text)
        if t is None:
            self.error(f"expected '{text}', found {self.describe(self.tok)}")
        return t

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ID":
            self.error(f"expected identifier, found {self.describe(t)}")
        self.i += 1
        return t

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "EOF" else f"'{t.text}'"

    def error(self, msg: str, tok: Optional[Token] = None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    # -- expressions ---------------------------------------------------------

    def var(self, name: str, tok: Token) -> Expr:
        raise NotImplementedError

    def build(self, op: str, tok: Token, *args: Expr) -> Expr:
        try:
            return mk(op, *args)
        except SortError as exc:
            raise ParseError(f"sort error: {exc}", tok.line, tok.col) from None

    def expr(self) -> Expr:
        left = self.conj()
        while True:
            t = self.eat("||", "or")
            if not t:
                return left
            left = self.build("||", t, left, self.conj())

    def conj(self) -> Expr:
        left = self.cmp()
        while True:
            t = self.eat("&&", "and")
            if not t:
                return left
            left = self.build("&&", t, left, self.cmp())

    def cmp(self) -> Expr:
        left = self.additive()
        t = self.eat(*_CMP_OPS)
        if t:
            right = self.additive()
            left, right = self.unify(left, right)
            return self.build(t.text, t, left, right)
        return left

    def unify(self, a: Expr, b: Expr):
        return a, b

    def additive(self) -> Expr:
        left = self.term()
        while True:
            t = self.eat("+", "-", "++")
            if not t:
                return left
            right = self.term()
            left, right = self.unify(left, right)
            op = t.text
            if op == "+" and left.sort == Sort.STRING:
                op = "++"
            left = self.build(op, t, left, right)

    def term(self) -> Expr:
        left = self.unary()
        while True:
            t = self.eat("*")
            if not t:
                return left
            left = self.build("*", t, left, self.unary())

    def unary(self) -> Expr:
        t = self.eat("!", "not")
        if t:
            return self.build("!", t, self.unary())
        t = self.eat("-")
        if t:
            if self.tok.kind == "INT":
                return Const(-int(self.ident_int()), Sort.INT)
            return self.build("neg", t, self.unary())
        return self.primary()

    def ident_int(self) -> str:
        t = self.tok
        self.i += 1
        return t.text

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "INT":
            self.i += 1
            return Const(int(t.text), Sort.INT)
        if t.kind == "STR":
            self.i += 1
            return Const(t.text[1:-1].replace('""', '"'), Sort.STRING)
        if self.eat("true"):
            return Const(True, Sort.BOOL)
        if self.eat("false"):
            return Const(False, Sort.BOOL)
        if self.at("ite") and self.peek().text == "(":
            self.i += 1
            self.expect("(")
            c = self.expr()
            self.expect(",")
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            a, b = self.unify(a, b)
            return self.build("ite", t, c, a, b)
        if self.eat("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ID":
            self.i += 1
            return self.var(t.text, t)
        self.error(f"unexpected {self.describe(t)} in expression")


_RESERVED = {
    "int", "bool", "string", "output", "if", "else", "while", "skip", "observe",
    "true", "false", "and", "or", "not", "ite", "forall", "exists",
}


class ProgramParser(_Base):
    def __init__(self, text: str):
        super().__init__(text)
        self.decls: dict = {}
        self.outputs: list = []
        self.next_loc = 0

    def var(self, name: str, tok: Token) -> Expr:
        if name not in self.decls:
            self.error(f"undeclared variable '{name}'", tok)
        return Var(name, self.decls[name])

    def parse(self) -> Program:
        self.header()
        body = self.stmts()
        if self.tok.kind != "EOF":
            self.error(f"unexpected {self.describe(self.tok)}")
        prog = Program(tuple(self.decls.items()), body, tuple(self.outputs))
        try:
            check_program(prog)
        except SortError as exc:
            raise ParseError(f"sort error: {exc}") from None
        return prog

    def header(self) -> None:
        while True:
            if self.tok.text in _SORT_KW and self.tok.kind == "ID":
                sort = _SORT_KW[self.ident().text]
                for name in self.names():
                    if name.text in self.decls:
                        self.error(f"variable '{name.text}' declared twice", name)
                    if name.text in _RESERVED:
                        self.error(f"'{name.text}' is a reserved word", name)
                    self.decls[name.text] = sort
            elif self.at("output"):
                self.i += 1
                for name in self.names():
                    if name.text not in self.decls:
                        self.error(f"output variable '{name.text}' is not declared", name)
                    if name.text not in self.outputs:
                        self.outputs.append(name.text)
            else:
                return

    def names(self) -> list:
        out = [self.ident()]
        while self.eat(","):
            out.append(self.ident())
        self.expect(";")
        return out

    def stmts(self):
        out = []
        while not self.at("}") and self.tok.kind != "EOF":
            if self.eat(";"):
                continue
            out.append(self.stmt())
        return seq(*out)

    def block(self):
        self.expect("{")
        body = self.stmts()
        self.expect("}")
        return body

    def stmt(self):
        t = self.tok
        loc = None
        if self.eat("@"):
            kw = self.ident()
            if kw.text != "repair":
                self.error(f"unknown annotation '@{kw.text}'", kw)
            loc = self.next_loc
            self.next_loc += 1
            if not (self.at("if", "while") or (self.tok.kind == "ID" and self.tok.text not in _RESERVED)):
                self.error("@repair must precede an assignment, if or while statement")
            t = self.tok
        if self.eat("skip"):
            return Skip()
        if self.eat("observe"):
            if self.eat("("):
                self.expect(")")
            return Observe()
        if self.eat("if"):
            return self.if_rest(loc)
        if self.eat("while"):
            self.expect("(")
            cond = self.guard()
            self.expect(")")
            return While(cond, self.block(), loc)
        if t.kind == "ID" and t.text not in _RESERVED:
            target = self.ident()
            if not self.eat("=", ":="):
                self.error(f"expected '=' after '{target.text}'")
            v = self.var(target.text, target)
            e = self.expr()
            if e.sort != v.sort:
                self.error(f"sort error: cannot assign {e.sort} to '{v.name}' of sort {v.sort}", target)
            return Assign(v, e, loc)
        self.error(f"unexpected {self.describe(t)} at start of statement")

    def guard(self) -> Expr:
        t = self.tok
        c = self.expr()
        if c.sort != Sort.BOOL:
            self.error(f"sort error: guard has sort {c.sort}, expected Bool", t)
        return c

    def if_rest(self, loc):
        self.expect("(")
        cond = self.guard()
        self.expect(")")
        then = self.block()
        orelse = Skip()
        if self.eat("else"):
            if self.at("if"):
                self.i += 1
                orelse = self.if_rest(None)
            else:
                orelse = self.block()
        return If(cond, then, orelse, loc)


def parse_program(text: str) -> Program:
    return ProgramParser(text).parse()


def parse_expr(text: str, sorts: Mapping[str, Sort]) -> Expr:
    p = ProgramParser(text)
    p.decls = dict(sorts)
    e = p.expr()
    if p.tok.kind != "EOF":
        p.error(f"unexpected {p.describe(p.tok)}")
    return e


# -- formulas -------------------------------------------------------------------

@dataclass(frozen=True)
class _R:
    kind: str  # atom not and or imp iff X G W true false
    args: tuple = ()


class FormulaParser(_Base):
    def __init__(self, text: str, sorts: Optional[Mapping[str, Sort]] = None):
        super().__init__(text)
        self.sorts = dict(sorts) if sorts is not None else None
        self.guessed: dict = {}
        self.bound: list = []

    def var(self, name: str, tok: Token) -> Expr:
        if not self.eat("["):
            self.error(f"variable '{name}' must be indexed by a trace variable, e.g. {name}[pi]", tok)
        tr = self.ident()
        self.expect("]")
        if tr.text not in self.bound:
            self.error(f"trace variable '{tr.text}' is not bound by the quantifier prefix", tr)
        if self.sorts is not None:
            if name not in self.sorts:
                self.error(f"unknown program variable '{name}'", tok)
            sort = self.sorts[name]
        else:
            sort = self.guessed.setdefault(name, Sort.INT)
        return Var(name, sort, tr.text)

    def unify(self, a: Expr, b: Expr):
        if self.sorts is not None or a.sort == b.sort:
            return a, b

        def retype(v, s):
            if isinstance(v, Var) and self.guessed.get(v.name) == Sort.INT:
                self.guessed[v.name] = s
                return Var(v.name, s, v.trace)
            return v

        if isinstance(a, Var):
            a = retype(a, b.sort)
        elif isinstance(b, Var):
            b = retype(b, a.sort)
        return a, b

    def parse(self) -> F.HyperLTL:
        prefix = []
        while self.at("forall", "exists"):
            q = self.ident().text
            tv = self.ident()
            if tv.text in self.bound:
                self.error(f"trace variable '{tv.text}' occurs twice in the prefix", tv)
            self.bound.append(tv.text)
            prefix.append((q, tv.text))
            self.expect(".")
        raw = self.iff()
        if self.tok.kind != "EOF":
            self.error(f"unexpected {self.describe(self.tok)}")
        body = _nnf(raw, True, self)
        return F.HyperLTL(tuple(prefix), body)

    def iff(self):
        left = self.imp()
        while self.eat("<->"):
            left = _R("iff", (left, self.imp()))
        return left

    def imp(self):
        left = self.lor()
        if self.eat("->"):
            return _R("imp", (left, self.imp()))
        return left

    def lor(self):
        left = self.land()
        while self.eat("||", "or"):
            left = _R("or", (left, self.land()))
        return left

    def land(self):
        left = self.until()
        while self.eat("&&", "and"):
            left = _R("and", (left, self.until()))
        return left

    def until(self):
        left = self.lunary()
        if self.tok.kind == "ID" and self.tok.text == "W":
            self.i += 1
            return _R("W", (left, self.until()))
        return left

    def _temporal_kw(self, kw: str) -> bool:
        return self.tok.kind == "ID" and self.tok.text == kw and self.peek().text != "["

    def lunary(self):
        if self.eat("!", "not"):
            return _R("not", (self.lunary(),))
        for kw in ("X", "G"):
            if self._temporal_kw(kw):
                self.i += 1
                return _R(kw, (self.lunary(),))
        if self.at("("):
            save = self.i
            try:
                self.i += 1
                inner = self.iff()
                self.expect(")")
                if self.tok.text in _CMP_OPS + ("+", "-", "*", "++"):
                    raise ParseError("term continues")
                return inner
            except ParseError:
                self.i = save
        return self.atom()

    def atom(self):
        t = self.tok
        e = self.additive()
        c = self.eat(*_CMP_OPS)
        if c:
            right = self.additive()
            e, right = self.unify(e, right)
            e = self.build(c.text, c, e, right)
        if e.sort != Sort.BOOL:
            self.error(f"sort error: atom has sort {e.sort}, expected Bool", t)
        if isinstance(e, Const):
            return _R("true" if e.value else "false")
        return _R("atom", (e,))


def _nnf(r: _R, positive: bool, p: FormulaParser) -> F.Body:
    k = r.kind
    if k == "true":
        return F.TT if positive else F.FF
    if k == "false":
        return F.FF if positive else F.TT
    if k == "atom":
        e = r.args[0]
        if isinstance(e, Op) and e.op == "!=":
            return F.Lit(mk("==", *e.args), not positive)
        if isinstance(e, Op) and e.op == "!":
            return _nnf(_R("atom", (e.args[0],)), not positive, p)
        return F.Lit(e, positive)
    if k == "not":
        return _nnf(r.args[0], not positive, p)
    if k == "and":
        parts = [_nnf(a, positive, p) for a in r.args]
        return F.land(*parts) if positive else F.lor(*parts)
    if k == "or":
        parts = [_nnf(a, positive, p) for a in r.args]
        return F.lor(*parts) if positive else F.land(*parts)
    if k == "imp":
        a, b = r.args
        if positive:
            return F.lor(_nnf(a, False, p), _nnf(b, True, p))
        return F.land(_nnf(a, True, p), _nnf(b, False, p))
    if k == "iff":
        a, b = r.args
        if positive:
            return F.land(
                F.lor(_nnf(a, False, p), _nnf(b, True, p)),
                F.lor(_nnf(b, False, p), _nnf(a, True, p)),
            )
        return F.lor(
            F.land(_nnf(a, True, p), _nnf(b, False, p)),
            F.land(_nnf(a, False, p), _nnf(b, True, p)),
        )
    if not positive:
        raise ParseError(
            f"negation of temporal operator '{k}' leaves the safety fragment; "
            "negation is only allowed on atoms"
        )
    if k == "X":
        return F.Next(_nnf(r.args[0], True, p))
    if k == "G":
        return F.globally(_nnf(r.args[0], True, p))
    if k == "W":
        return F.WUntil(_nnf(r.args[0], True, p), _nnf(r.args[1], True, p))
    raise AssertionError(k)


def parse_formula(text: str, sorts: Optional[Mapping[str, Sort]] = None) -> F.HyperLTL:
    """Parse a HyperLTL formula; ``sorts`` (program declarations) types the atoms."""
    return FormulaParser(text, sorts).parse()
