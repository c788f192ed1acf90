"""Expression trees shared by programs, formulas and constraint terms."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Optional, Union


class Sort(enum.Enum):
    INT = "Int"
    BOOL = "Bool"
    STRING = "String"

    def __str__(self) -> str:
        return self.value

    @property
    def keyword(self) -> str:
        return {"Int": "int", "Bool": "bool", "String": "string"}[self.value]


class SortError(TypeError):
    pass


Value = Union[int, bool, str]


class _Hashed:
    """Caches the structural hash; terms are DAGs and rehashing them is quadratic."""

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self._hash_fields))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class Const(_Hashed):
    _hash_fields = ('value', 'sort')

    value: Value
    sort: Sort

    def __post_init__(self):
        ok = {
            Sort.INT: isinstance(self.value, int) and not isinstance(self.value, bool),
            Sort.BOOL: isinstance(self.value, bool),
            Sort.STRING: isinstance(self.value, str),
        }[self.sort]
        if not ok:
            raise SortError(f"constant {self.value!r} is not of sort {self.sort}")


@dataclass(frozen=True)
class Var(_Hashed):
    """A program variable; ``trace`` is set for trace-indexed copies ``x[pi]``."""

    _hash_fields = ('name', 'sort', 'trace')

    name: str
    sort: Sort
    trace: Optional[str] = None

    @property
    def key(self) -> str:
        return self.name if self.trace is None else f"{self.name}!{self.trace}"


@dataclass(frozen=True)
class Op(_Hashed):
    _hash_fields = ('op', 'args', 'sort')

    op: str
    args: tuple
    sort: Sort


@dataclass(frozen=True)
class Call(_Hashed):
    """Application of a synthesis function symbol."""

    _hash_fields = ('name', 'args', 'sort')

    name: str
    args: tuple
    sort: Sort


@dataclass(frozen=True)
class Quant(_Hashed):
    """Typed quantifier block; only occurs in constraint terms."""

    _hash_fields = ('kind', 'vars', 'body')

    kind: str  # "forall" | "exists"
    vars: tuple
    body: "Expr"

    @property
    def sort(self) -> Sort:
        return Sort.BOOL


Expr = Union[Const, Var, Op, Call, Quant]

TRUE = Const(True, Sort.BOOL)
FALSE = Const(False, Sort.BOOL)


# operator -> (argument sorts or None for "equal sorts", result sort)
_ARITH = ("+", "-", "*")
_CMP = ("<", "<=", ">", ">=")
_EQ = ("==", "!=")
_LOGIC = ("&&", "||")


def mk(op: str, *args: Expr) -> Op:
    """Build a well-sorted operator node, raising :class:`SortError` otherwise."""
    sorts = [a.sort for a in args]
    if op in _ARITH:
        if len(args) != 2 or sorts != [Sort.INT, Sort.INT]:
            raise SortError(f"operator '{op}' expects Int x Int, got {_fmt(sorts)}")
        return Op(op, args, Sort.INT)
    if op == "neg":
        if sorts != [Sort.INT]:
            raise SortError(f"unary '-' expects Int, got {_fmt(sorts)}")
        return Op(op, args, Sort.INT)
    if op == "++":
        if len(args) != 2 or sorts != [Sort.STRING, Sort.STRING]:
            raise SortError(f"concatenation expects String x String, got {_fmt(sorts)}")
        return Op(op, args, Sort.STRING)
    if op in _CMP:
        if len(args) != 2 or sorts != [Sort.INT, Sort.INT]:
            raise SortError(f"operator '{op}' expects Int x Int, got {_fmt(sorts)}")
        return Op(op, args, Sort.BOOL)
    if op in _EQ:
        if len(args) != 2 or sorts[0] != sorts[1]:
            raise SortError(f"operator '{op}' expects equal sorts, got {_fmt(sorts)}")
        return Op(op, args, Sort.BOOL)
    if op in _LOGIC or op == "=>":
        if len(args) < 2 or any(s != Sort.BOOL for s in sorts):
            raise SortError(f"operator '{op}' expects Bool operands, got {_fmt(sorts)}")
        return Op(op, args, Sort.BOOL)
    if op == "!":
        if sorts != [Sort.BOOL]:
            raise SortError(f"operator '!' expects Bool, got {_fmt(sorts)}")
        return Op(op, args, Sort.BOOL)
    if op == "ite":
        if len(args) != 3 or sorts[0] != Sort.BOOL or sorts[1] != sorts[2]:
            raise SortError(f"ite expects (Bool, S, S), got {_fmt(sorts)}")
        return Op(op, args, sorts[1])
    raise SortError(f"unknown operator '{op}'")


def _fmt(sorts) -> str:
    return " x ".join(str(s) for s in sorts) or "nothing"


# -- smart constructors with unit/zero folding only -------------------------

def conj(*args: Expr) -> Expr:
    flat = []
    for a in args:
        if a == TRUE:
            continue
        if a == FALSE:
            return FALSE
        if isinstance(a, Op) and a.op == "&&":
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return Op("&&", tuple(flat), Sort.BOOL)


def disj(*args: Expr) -> Expr:
    flat = []
    for a in args:
        if a == FALSE:
            continue
        if a == TRUE:
            return TRUE
        if isinstance(a, Op) and a.op == "||":
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Op("||", tuple(flat), Sort.BOOL)


def neg(a: Expr) -> Expr:
    if a == TRUE:
        return FALSE
    if a == FALSE:
        return TRUE
    return Op("!", (a,), Sort.BOOL)


def implies(a: Expr, b: Expr) -> Expr:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    return Op("=>", (a, b), Sort.BOOL)


def eq(a: Expr, b: Expr) -> Expr:
    return mk("==", a, b)


def quant(kind: str, variables, body: Expr) -> Expr:
    variables = tuple(variables)
    if not variables or body in (TRUE, FALSE):
        return body
    return Quant(kind, variables, body)


# -- traversal ----------------------------------------------------------------

def children(e: Expr) -> tuple:
    if isinstance(e, (Op, Call)):
        return e.args
    if isinstance(e, Quant):
        return (e.body,)
    return ()


def walk(e: Expr, unique: bool = False) -> Iterator[Expr]:
    """Pre-order traversal; ``unique`` visits each shared DAG node once."""
    stack = [e]
    seen: set = set()
    while stack:
        node = stack.pop()
        if unique:
            if id(node) in seen:
                continue
            seen.add(id(node))
        yield node
        stack.extend(reversed(children(node)))


def free_vars(e: Expr, _memo=None) -> frozenset:
    memo = {} if _memo is None else _memo
    hit = memo.get(id(e))
    if hit is not None:
        return hit
    if isinstance(e, Var):
        out = frozenset((e,))
    elif isinstance(e, Quant):
        out = free_vars(e.body, memo) - frozenset(e.vars)
    else:
        out = frozenset().union(*(free_vars(c, memo) for c in children(e)))
    memo[id(e)] = out
    return out


def calls(e: Expr) -> set:
    return {n for n in walk(e, unique=True) if isinstance(n, Call)}


def size(e: Expr) -> int:
    """AST node count."""
    return sum(1 for _ in walk(e))


def rebuild(e: Expr, kids: tuple) -> Expr:
    if isinstance(e, Op):
        return Op(e.op, kids, e.sort)
    if isinstance(e, Call):
        return Call(e.name, kids, e.sort)
    if isinstance(e, Quant):
        return Quant(e.kind, e.vars, kids[0])
    return e


def transform(e: Expr, fn: Callable[[Expr], Optional[Expr]], _memo=None) -> Expr:
    """Bottom-up rewrite; ``fn`` returns a replacement or None to keep the node."""
    memo = {} if _memo is None else _memo
    hit = memo.get(id(e))
    if hit is not None:
        return hit[1]
    kids = children(e)
    if kids:
        new_kids = tuple(transform(k, fn, memo) for k in kids)
        changed = any(a is not b for a, b in zip(new_kids, kids))
        node = rebuild(e, new_kids) if changed else e
    else:
        node = e
    out = fn(node)
    result = node if out is None else out
    memo[id(e)] = (e, result)  # keep e alive so its id is not reused
    return result


def substitute(e: Expr, mapping: Mapping[Var, Expr]) -> Expr:
    """Capture-avoiding only in the sense that bound variables are never replaced."""
    if not mapping:
        return e
    memo: dict = {}

    def go(node: Expr) -> Expr:
        if id(node) in memo:
            return memo[id(node)][1]
        if isinstance(node, Var):
            out = mapping.get(node, node)
        elif isinstance(node, Quant):
            inner = {k: v for k, v in mapping.items() if k not in node.vars}
            out = Quant(node.kind, node.vars, substitute(node.body, inner))
        elif isinstance(node, (Op, Call)):
            out = rebuild(node, tuple(go(a) for a in node.args))
        else:
            out = node
        memo[id(node)] = (node, out)
        return out

    return go(e)


def index(e: Expr, trace: str) -> Expr:
    """Rename every plain program variable ``y`` to ``y[trace]``."""
    return transform(
        e,
        lambda n: Var(n.name, n.sort, trace) if isinstance(n, Var) and n.trace is None else None,
    )


def expand_calls(e: Expr, definitions: Mapping[str, tuple]) -> Expr:
    """Replace each ``f(a1..am)`` by ``body[params / a]`` for ``f -> (params, body)``."""

    def fn(n: Expr):
        if isinstance(n, Call) and n.name in definitions:
            params, body = definitions[n.name]
            if len(params) != len(n.args):
                raise SortError(f"arity mismatch applying {n.name}")
            for p, a in zip(params, n.args):
                if p.sort != a.sort:
                    raise SortError(f"argument {p.name} of {n.name} expects {p.sort}, got {a.sort}")
            return substitute(body, dict(zip(params, n.args)))
        return None

    return transform(e, fn)


def _fold(n: Expr) -> Optional[Expr]:
    if isinstance(n, Quant):
        if isinstance(n.body, Const):
            return n.body
        return None
    if not isinstance(n, Op):
        return None
    a = n.args
    if n.op == "&&":
        return conj(*a)
    if n.op == "||":
        return disj(*a)
    if n.op == "!":
        if isinstance(a[0], Op) and a[0].op == "!":
            return a[0].args[0]
        return neg(a[0])
    if n.op == "=>":
        return implies(*a) if len(a) == 2 else None
    if n.op == "ite":
        if isinstance(a[0], Const):
            return a[1] if a[0].value else a[2]
        return a[1] if a[1] == a[2] else None
    if n.op in _EQ and a[0] == a[1]:
        return TRUE if n.op == "==" else FALSE
    if all(isinstance(x, Const) for x in a):
        return Const(evaluate(n, {}), n.sort)
    return None


def simplify(e: Expr) -> Expr:
    """Constant folding, unit laws and trivial (dis)equalities; semantics-preserving."""
    return transform(e, _fold)


def pull_forall(e: Expr) -> tuple:
    """``(vars, body)`` with universal blocks lifted out of conjunctions, disjunctions and
    implication consequents, where no variable capture can occur."""
    if isinstance(e, Quant) and e.kind == "forall":
        vs, body = pull_forall(e.body)
        return tuple(e.vars) + vs, body
    if isinstance(e, Op) and e.op in ("&&", "||", "=>"):
        pulled = [((), a) if e.op == "=>" and k == 0 else pull_forall(a) for k, a in enumerate(e.args)]
        out_vars: list = []
        kids = []
        for k, (vs, body) in enumerate(pulled):
            others = frozenset().union(*(free_vars(a) for j, a in enumerate(e.args) if j != k))
            clash = set(vs) & (others | (set(out_vars) if e.op != "&&" else set()))
            if vs and not clash:
                out_vars.extend(v for v in vs if v not in out_vars)
                kids.append(body)
            else:
                kids.append(e.args[k])
        if not out_vars:
            return (), e
        return tuple(out_vars), Op(e.op, tuple(kids), Sort.BOOL)
    return (), e


# -- concrete evaluation ---------------------------------------------------------

def evaluate(e: Expr, env: Mapping[str, Value]) -> Value:
    """Evaluate a quantifier-free, call-free expression; ``env`` is keyed by :attr:`Var.key`."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return env[e.key]
    if isinstance(e, Op):
        op = e.op
        if op == "&&":
            return all(evaluate(a, env) for a in e.args)
        if op == "||":
            return any(evaluate(a, env) for a in e.args)
        if op == "=>":
            return (not evaluate(e.args[0], env)) or evaluate(e.args[1], env)
        if op == "ite":
            return evaluate(e.args[1] if evaluate(e.args[0], env) else e.args[2], env)
        vals = [evaluate(a, env) for a in e.args]
        if op == "+":
            return vals[0] + vals[1]
        if op == "-":
            return vals[0] - vals[1]
        if op == "*":
            return vals[0] * vals[1]
        if op == "neg":
            return -vals[0]
        if op == "++":
            return vals[0] + vals[1]
        if op == "==":
            return vals[0] == vals[1]
        if op == "!=":
            return vals[0] != vals[1]
        if op == "<":
            return vals[0] < vals[1]
        if op == "<=":
            return vals[0] <= vals[1]
        if op == ">":
            return vals[0] > vals[1]
        if op == ">=":
            return vals[0] >= vals[1]
        if op == "!":
            return not vals[0]
        raise ValueError(f"cannot evaluate operator {op}")
    raise ValueError(f"cannot evaluate {type(e).__name__} concretely")
