"""SyGuS problems: grammars, SyGuS-IF v2 serialization, solver invocation and solution parsing."""

from __future__ import annotations

import os
import shlex
import shutil
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .lang.expr import (
    Call, Const, Expr, Op, Quant, Sort, SortError, Var, conj, expand_calls, free_vars, mk, pull_forall, quant, size, substitute, walk,
)
from .smt import (
    SExprError, is_valid, parse_sexprs, parse_sort, symbol, term_from_sexpr,
    to_smtlib, var_from_symbol,
)

DEFAULT_TIMEOUT = 120.0
DEFAULT_SOLVER_CMD = f"{shlex.quote(sys.executable)} -m hyperrepair.cvc5_runner {{file}}"


class SolverError(RuntimeError):
    """The solver crashed, produced unparsable output, or broke the grammar contract."""

    def __init__(self, msg: str, raw: str = ""):
        super().__init__(msg + (f"\n--- solver output ---\n{raw}" if raw else ""))
        self.raw = raw


# -- grammars -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Grammar:
    """Nonterminals appear in productions as variables whose name is a nonterminal."""

    start: str
    nonterminals: tuple  # ((name, Sort), ...), start first
    rules: tuple  # ((name, (production Expr, ...)), ...)

    def __post_init__(self):
        names = [n for n, _ in self.nonterminals]
        if not names or names[0] != self.start:
            raise ValueError("the start nonterminal must be listed first")
        sorts = dict(self.nonterminals)
        for name, prods in self.rules:
            if name not in sorts:
                raise ValueError(f"rule for undeclared nonterminal '{name}'")
            for p in prods:
                if p.sort != sorts[name]:
                    raise SortError(f"production for {name} has sort {p.sort}, expected {sorts[name]}")
        if not self.productive():
            raise ValueError("grammar generates no finite term from its start symbol")

    @property
    def sort(self) -> Sort:
        return dict(self.nonterminals)[self.start]

    def productions(self, nt: str) -> tuple:
        return dict(self.rules).get(nt, ())

    def is_nonterminal(self, e: Expr) -> bool:
        return isinstance(e, Var) and e.trace is None and e.name in dict(self.nonterminals) \
            and dict(self.nonterminals)[e.name] == e.sort

    def _nt_refs(self, p: Expr) -> list:
        return [n for n in walk(p) if self.is_nonterminal(n)]

    def productive(self) -> bool:
        good: set = set()
        changed = True
        while changed:
            changed = False
            for name, prods in self.rules:
                if name in good:
                    continue
                if any(all(r.name in good for r in self._nt_refs(p)) for p in prods):
                    good.add(name)
                    changed = True
        return self.start in good

    def derives(self, term: Expr, nt: Optional[str] = None) -> bool:
        """Whether ``term`` (over the parameters) is generated from ``nt`` (default: start)."""
        memo: dict = {}

        def from_nt(n: str, t: Expr) -> bool:
            key = (n, id(t))
            if key in memo:
                return memo[key]
            memo[key] = False  # guards unit-production cycles
            ok = any(match(p, t) for p in self.productions(n))
            memo[key] = ok
            return ok

        def match(p: Expr, t: Expr) -> bool:
            if self.is_nonterminal(p):
                return t.sort == p.sort and from_nt(p.name, t)
            if isinstance(p, (Const, Var)):
                return p == t
            if isinstance(p, Op) and isinstance(t, Op):
                return p.op == t.op and len(p.args) == len(t.args) and all(
                    match(a, b) for a, b in zip(p.args, t.args))
            return False

        return from_nt(nt or self.start, term)

    def to_sygus(self) -> str:
        decl = " ".join(f"({n} {s})" for n, s in self.nonterminals)
        groups = []
        for n, s in self.nonterminals:
            prods = " ".join(to_smtlib(p) for p in self.productions(n))
            groups.append(f"({n} {s} ({prods}))")
        return f"({decl})\n    ({' '.join(groups)})"


_NT = {Sort.INT: "Ix", Sort.BOOL: "Bx", Sort.STRING: "Sx"}


def _nt(sort: Sort, taken: set) -> str:
    name = _NT[sort]
    while name in taken:
        name += "_"
    return name


def default_grammar(sort: Sort, args: Sequence[Var], string_literals: Sequence[str] = (),
                    int_literals: Sequence[int] = (0, 1), bool_constants: Optional[bool] = None) -> Grammar:
    """Piece-wise linear Int/Bool expressions; strings from arguments, literals and concatenation.

    ``bool_constants`` adds ``true``/``false`` to the Boolean nonterminal; by
    default they are present exactly when the synthesized symbol is Bool-sorted.
    """
    taken = {a.name for a in args}
    has_int = sort == Sort.INT or any(a.sort == Sort.INT for a in args)
    has_str = sort == Sort.STRING or any(a.sort == Sort.STRING for a in args)
    has_bool = True  # conditions are needed by ite
    if bool_constants is None:
        bool_constants = sort == Sort.BOOL
    nts = {}
    if has_int:
        nts[Sort.INT] = Var(_nt(Sort.INT, taken), Sort.INT)
    if has_bool:
        nts[Sort.BOOL] = Var(_nt(Sort.BOOL, taken), Sort.BOOL)
    if has_str:
        nts[Sort.STRING] = Var(_nt(Sort.STRING, taken), Sort.STRING)
    rules = {}
    B = nts[Sort.BOOL]
    if has_int:
        I = nts[Sort.INT]
        rules[Sort.INT] = tuple(a for a in args if a.sort == Sort.INT) + tuple(
            Const(v, Sort.INT) for v in int_literals) + (mk("+", I, I), mk("-", I, I), mk("ite", B, I, I))
    if has_str:
        S = nts[Sort.STRING]
        lits = tuple(Const(s, Sort.STRING) for s in dict.fromkeys(string_literals))
        rules[Sort.STRING] = tuple(a for a in args if a.sort == Sort.STRING) + lits + (
            mk("++", S, S), mk("ite", B, S, S))
    bprods = list(a for a in args if a.sort == Sort.BOOL)
    if bool_constants:
        bprods += [Const(True, Sort.BOOL), Const(False, Sort.BOOL)]
    bprods += [mk("&&", B, B), mk("||", B, B), mk("!", B)]
    if has_int:
        I = nts[Sort.INT]
        bprods += [mk("==", I, I), mk("<=", I, I), mk(">=", I, I)]
    if has_str:
        S = nts[Sort.STRING]
        bprods += [mk("==", S, S)]
    rules[Sort.BOOL] = tuple(bprods)
    order = [sort] + [s for s in (Sort.INT, Sort.BOOL, Sort.STRING) if s in nts and s != sort]
    return Grammar(
        nts[sort].name,
        tuple((nts[s].name, s) for s in order),
        tuple((nts[s].name, rules[s]) for s in order),
    )


def parse_grammar(text: str, params: Sequence[Var]) -> Grammar:
    """Read a grammar in SyGuS-IF v2 form: ``((N S) ...) ((N S (prod ...)) ...)``."""
    sx = parse_sexprs(text)
    if len(sx) != 2:
        raise SExprError("a grammar is a nonterminal declaration list followed by the rule list")
    decls = [(n, parse_sort(s)) for n, s in sx[0]]
    scope = {p.name: p for p in params}
    for n, s in decls:
        scope[n] = Var(n, s)
    rules = []
    for n, s, prods in sx[1]:
        rules.append((n, tuple(term_from_sexpr(p, scope) for p in prods)))
    return Grammar(decls[0][0], tuple(decls), tuple(rules))


# -- problems --------------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthFun:
    name: str
    params: tuple  # Vars
    sort: Sort
    grammar: Grammar

    def signature(self) -> tuple:
        return tuple(p.sort for p in self.params), self.sort


@dataclass
class SygusProblem:
    functions: tuple  # SynthFun, ...
    constraint: Expr
    logic: str = "ALL"

    def __post_init__(self):
        names = {f.name for f in self.functions}
        for c in walk(self.constraint, unique=True):
            if isinstance(c, Call) and c.name not in names:
                raise ValueError(f"synthesis symbol '{c.name}' has no grammar")

    def conjuncts(self) -> tuple:
        c = self.constraint
        return c.args if isinstance(c, Op) and c.op == "&&" else (c,)

    def hoisted(self) -> tuple:
        """``(universal variables, witness constants, constraint bodies)``.

        Liftable universal blocks become ``declare-var`` declarations.  A closed
        leading existential block of a conjunct is Skolemized into nullary,
        grammar-free synthesis symbols, which is equisatisfiable because nothing
        outside the conjunct constrains it.
        """
        declared: dict = {}
        witnesses: dict = {}
        bodies = []
        for part in self.conjuncts():
            while isinstance(part, Quant) and part.kind == "exists" and not free_vars(part):
                renaming = {}
                for v in part.vars:
                    w, k = v, 1
                    while w.key in witnesses:
                        k += 1
                        w = Var(v.name, v.sort, f"{v.trace}{k}")
                    witnesses[w.key] = w
                    if w != v:
                        renaming[v] = w
                part = substitute(part.body, renaming)
            lifted, part = pull_forall(part)
            for v in lifted:
                prev = declared.get(v.key)
                if prev is not None and prev != v:
                    raise ValueError(f"variable {v.key} declared with two sorts")
                declared[v.key] = v
            bodies.append(part)
        for v in free_vars(self.constraint):
            declared.setdefault(v.key, v)
        used = {v.key for b in bodies for v in free_vars(b)}
        witnesses = {k: w for k, w in witnesses.items() if k in used}
        clash = set(declared) & set(witnesses)
        if clash:
            raise ValueError(f"variables {sorted(clash)} are both universal and existential")
        return (tuple(declared[k] for k in sorted(declared)), tuple(witnesses.values()), tuple(bodies))


def serialize_sygus(p: SygusProblem) -> str:
    lines = [f"(set-logic {p.logic})"]
    for f in p.functions:
        params = " ".join(f"({symbol(v.name)} {v.sort})" for v in f.params)
        lines.append(f"(synth-fun {symbol(f.name)} ({params}) {f.sort}\n    {f.grammar.to_sygus()})")
    variables, witnesses, bodies = p.hoisted()
    for w in witnesses:
        lines.append(f"(synth-fun {symbol(w.key)} () {w.sort})")
    for v in variables:
        lines.append(f"(declare-var {symbol(v.key)} {v.sort})")
    for b in bodies:
        lines.append(f"(constraint {to_smtlib(b)})")
    lines.append("(check-synth)")
    return "\n".join(lines) + "\n"


def read_sygus(text: str) -> SygusProblem:
    """Minimal SyGuS-IF v2 reader for the subset :func:`serialize_sygus` emits."""
    logic = "ALL"
    functions = []
    declared: list = []
    witnesses: list = []
    constraints = []
    sigs: dict = {}
    for cmd in parse_sexprs(text):
        head = cmd[0]
        if head == "set-logic":
            logic = cmd[1]
        elif head == "synth-fun" and len(cmd) == 4 and not cmd[2]:
            witnesses.append(var_from_symbol(cmd[1], parse_sort(cmd[3])))
        elif head == "synth-fun":
            name, params_sx, ret = cmd[1], cmd[2], parse_sort(cmd[3])
            params = tuple(Var(n, parse_sort(s)) for n, s in params_sx)
            scope = {v.name: v for v in params}
            decls = [(n, parse_sort(s)) for n, s in cmd[4]]
            for n, s in decls:
                scope[n] = Var(n, s)
            rules = tuple((n, tuple(term_from_sexpr(x, scope) for x in prods)) for n, _, prods in cmd[5])
            g = Grammar(decls[0][0], tuple(decls), rules)
            functions.append(SynthFun(name, params, ret, g))
            sigs[name] = (tuple(v.sort for v in params), ret)
        elif head == "declare-var":
            declared.append(var_from_symbol(cmd[1], parse_sort(cmd[2])))
        elif head == "constraint":
            scope = {v.key: v for v in declared + witnesses}
            constraints.append(term_from_sexpr(cmd[1], scope, sigs))
        elif head == "check-synth":
            pass
        else:
            raise SExprError(f"unsupported command '{head}'")
    # each constraint closes over the universals it mentions, inside its own witnesses
    parts = []
    for c in constraints:
        used = free_vars(c)
        ws = [w for w in witnesses if w in used]
        parts.append(quant("exists", ws, quant("forall", [v for v in declared if v in used], c)))
    return SygusProblem(tuple(functions), conj(*parts), logic)


# -- solving -----------------------------------------------------------------------------------

@dataclass
class RepairCandidate:
    exprs: tuple  # one Expr per synthesis function, in problem order
    names: tuple
    params: tuple  # tuple of parameter tuples
    solver_time: float = 0.0
    iteration: int = 0
    recheck: str = "valid"  # "valid" | "unknown" | "skipped"

    def definitions(self) -> dict:
        return {n: (ps, e) for n, ps, e in zip(self.names, self.params, self.exprs)}

    @property
    def size(self) -> int:
        return sum(size(e) for e in self.exprs)


@dataclass
class SolveResult:
    status: str  # "solved" | "unsat" | "unknown"
    candidate: Optional[RepairCandidate] = None
    elapsed: float = 0.0
    raw: str = ""
    file: Optional[str] = None


def parse_solution(output: str, p: SygusProblem) -> tuple:
    """Extract one body per synthesis function from ``(define-fun ...)`` blocks."""
    sx = parse_sexprs(output)
    defs: dict = {}

    def collect(items):
        for it in items:
            if isinstance(it, list) and it and it[0] == "define-fun":
                defs[it[1]] = it
            elif isinstance(it, list):
                collect(it)

    collect(sx)
    out = []
    for f in p.functions:
        d = defs.get(f.name)
        if d is None:
            raise SolverError(f"no definition for '{f.name}' in solver output", output)
        _, _, params_sx, ret, body = d
        if parse_sort(ret) != f.sort or len(params_sx) != len(f.params):
            raise SolverError(f"definition of '{f.name}' has the wrong signature", output)
        # the solver may rename parameters; map them positionally
        scope = {n: v for (n, _), v in zip(params_sx, f.params)}
        term = term_from_sexpr(body, scope)
        if term.sort != f.sort:
            raise SolverError(f"definition of '{f.name}' is ill-sorted", output)
        if not f.grammar.derives(term):
            raise SolverError(f"solution for '{f.name}' is not derivable from its grammar", output)
        out.append(term)
    return tuple(out)


def _run(cmd: str, timeout: float) -> tuple:
    """(returncode, stdout, stderr) or None on timeout; the whole process group is killed on expiry."""
    proc = subprocess.Popen(cmd, shell=True, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
                            start_new_session=True)
    try:
        out, err = proc.communicate(timeout=timeout)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        out, _ = proc.communicate()
        return None, out or "", ""
    return proc.returncode, out, err


def solve(p: SygusProblem, timeout: float = DEFAULT_TIMEOUT, solver_cmd: str = DEFAULT_SOLVER_CMD,
          workdir: Optional[str] = None, tag: str = "query", recheck: bool = True) -> SolveResult:
    """Run an external SyGuS-IF v2 solver on ``p``.

    ``solver_cmd`` is a template with a ``{file}`` placeholder.  The problem file
    and the raw transcript are kept in ``workdir`` when given.
    """
    own_dir = workdir is None
    wd = workdir or tempfile.mkdtemp(prefix="hyperrepair-")
    try:
        res = _solve_in(p, timeout, solver_cmd, wd, tag, recheck)
    finally:
        if own_dir:
            shutil.rmtree(wd, ignore_errors=True)
    if own_dir:
        res.file = None
    return res


def _solve_in(p: SygusProblem, timeout: float, solver_cmd: str, wd: str, tag: str, recheck: bool) -> SolveResult:
    os.makedirs(wd, exist_ok=True)
    path = os.path.join(wd, f"{tag}.sy")
    with open(path, "w") as fh:
        fh.write(serialize_sygus(p))
    t0 = time.monotonic()
    code, out, err = _run(solver_cmd.format(file=shlex.quote(path)), timeout)
    elapsed = time.monotonic() - t0
    raw = out + (("\n" + err) if err else "")
    _keep(wd, tag, raw)
    if code is None:
        return SolveResult("unknown", None, elapsed, raw, path)
    out = out.strip()
    if out.startswith("infeasible") or out.startswith("(infeasible"):
        return SolveResult("unsat", None, elapsed, raw, path)
    if out.startswith("unknown") or out.startswith("fail") or out == "timeout":
        return SolveResult("unknown", None, elapsed, raw, path)
    if code != 0 and "define-fun" not in out:
        raise SolverError(f"solver exited with status {code}", raw)
    exprs = parse_solution(out, p)
    cand = RepairCandidate(
        exprs, tuple(f.name for f in p.functions), tuple(f.params for f in p.functions), elapsed)
    if recheck:
        verdict = is_valid(expand_calls(p.constraint, cand.definitions()), timeout=60.0)
        if verdict is False:
            raise SolverError("solution fails the independent validity re-check", raw)
        cand.recheck = "valid" if verdict else "unknown"
    else:
        cand.recheck = "skipped"
    return SolveResult("solved", cand, elapsed, raw, path)


def _keep(wd: str, tag: str, raw: str) -> None:
    with open(os.path.join(wd, f"{tag}.out"), "w") as fh:
        fh.write(raw)
