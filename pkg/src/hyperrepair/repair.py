"""Instrumentation of repair locations, the iterative repair loop and bounded verification."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Mapping, Optional, Sequence

from .automaton import ltl_to_nsa
from .encode import build_enc, build_iter
from .lang import formula as F
from .lang.expr import Call, Const, Expr, Sort, Var, conj, expand_calls, simplify, size, walk
from .lang.printer import expr_str, program_str
from .lang.program import (
    Assign, If, Program, While, check_program, literals, map_stmts, repair_locations, statements,
    stmt_exprs,
)
from .semantics import FiniteDomain, Inconclusive, oracle_check_hyperltl, oracle_preserved_inputs
from .smt import is_valid
from .symexec import Bounds, PathSet, explore_paths
from .synth import (
    DEFAULT_SOLVER_CMD, DEFAULT_TIMEOUT, Grammar, RepairCandidate, SygusProblem, SynthFun,
    default_grammar, parse_grammar, solve,
)


class RepairError(ValueError):
    pass


# -- instrumentation ------------------------------------------------------------------------

@dataclass(frozen=True)
class Skeleton:
    program: Program  # repair locations hold synthesis-symbol applications
    functions: tuple  # ((name, params, sort), ...) in location order
    original: tuple  # replaced expressions, e_P
    locations: tuple  # location ids

    def definitions(self, exprs: Sequence[Expr]) -> dict:
        if len(exprs) != len(self.functions):
            raise RepairError(f"expected {len(self.functions)} expressions, got {len(exprs)}")
        out = {}
        for (name, params, sort), e in zip(self.functions, exprs):
            if e.sort != sort:
                raise RepairError(f"patch for {name} has sort {e.sort}, expected {sort}")
            out[name] = (params, e)
        return out


def _sink_variables(p: Program) -> set:
    """Variables that are assigned but never read by any program expression."""
    assigned = {s.var.name for s in statements(p.body) if isinstance(s, Assign)}
    read = {
        n.name for s in statements(p.body) for e in stmt_exprs(s) for n in walk(e) if isinstance(n, Var)
    }
    return assigned - read


def argument_list(p: Program) -> tuple:
    """Declared variables minus pure sinks, in declaration order."""
    sinks = _sink_variables(p)
    return tuple(v for v in p.variables if v.name not in sinks)


def instrument(p: Program, args: Optional[Sequence[str]] = None) -> Skeleton:
    locs = repair_locations(p)
    if not locs:
        raise RepairError("no @repair markers: annotate the statements to repair (fault localization is not automated)")
    check_program(p)
    if args is not None:
        unknown = set(args) - set(p.sorts)
        if unknown:
            raise RepairError(f"argument override names undeclared variables {sorted(unknown)}")
        params = tuple(v for v in p.variables if v.name in set(args))
    else:
        params = argument_list(p)
    taken = set(p.sorts)
    functions, original, ids = [], [], []
    names = {}
    for k, s in enumerate(locs, start=1):
        name = f"f{k}"
        while name in taken:
            name += "_"
        taken.add(name)
        names[s.loc] = name
        sort = s.expr.sort if isinstance(s, Assign) else Sort.BOOL
        functions.append((name, params, sort))
        original.append(s.expr if isinstance(s, Assign) else s.cond)
        ids.append(s.loc)

    def hole(s):
        loc = getattr(s, "loc", None)
        if loc is None:
            return s
        call = Call(names[loc], params, s.expr.sort if isinstance(s, Assign) else Sort.BOOL)
        if isinstance(s, Assign):
            return Assign(s.var, call, loc)
        if isinstance(s, If):
            return If(call, s.then, s.orelse, loc)
        return While(call, s.body, loc)

    q = p.with_body(map_stmts(p.body, hole))
    return Skeleton(q, tuple(functions), tuple(original), tuple(ids))


def apply_patch(sk: Skeleton, exprs: Sequence[Expr]) -> Program:
    """The skeleton with each synthesis-symbol application replaced by its patch (markers dropped)."""
    defs = sk.definitions(exprs)

    def fill(s):
        if isinstance(s, Assign):
            return Assign(s.var, expand_calls(s.expr, defs))
        if isinstance(s, If):
            return If(expand_calls(s.cond, defs), s.then, s.orelse)
        if isinstance(s, While):
            return While(expand_calls(s.cond, defs), s.body)
        return s

    return sk.program.with_body(map_stmts(sk.program.body, fill))


# -- bounded verification ------------------------------------------------------------------------

@dataclass
class BoundedVerdict:
    status: str  # "holds-bounded" | "violated" | "inconclusive"
    exact: bool  # every path was explored to completion
    paths: int
    elapsed: float
    note: str = ""


def _paths_for(phi: F.HyperLTL, ps: PathSet) -> list:
    """Universal formulas may use cut paths (necessary conditions); others need maximal ones."""
    return list(ps.paths) if phi.universal else ps.maximal


def verify_bounded(q: Program, phi: F.HyperLTL, bounds: Bounds = Bounds(), timeout: float = 60.0) -> BoundedVerdict:
    t0 = time.monotonic()
    if any(isinstance(n, Call) for s in statements(q.body) for e in stmt_exprs(s) for n in walk(e)):
        raise RepairError("bounded verification needs a hole-free program")
    ps = explore_paths(q, bounds)
    variables = q.variables
    if ps.complete:
        ok = is_valid(build_enc(phi, ps.paths, variables), timeout)
        status = {True: "holds-bounded", False: "violated", None: "inconclusive"}[ok]
        return BoundedVerdict(status, True, len(ps), time.monotonic() - t0)
    if phi.universal:
        ok = is_valid(build_enc(phi, ps.paths, variables), timeout)
        status = {True: "holds-bounded", False: "violated", None: "inconclusive"}[ok]
        return BoundedVerdict(status, False, len(ps), time.monotonic() - t0, "universal formula on cut paths")
    if phi.existential:
        ok = is_valid(build_enc(phi, ps.maximal, variables), timeout)
        status = "holds-bounded" if ok else "inconclusive"
        return BoundedVerdict(status, False, len(ps), time.monotonic() - t0, "existential formula on maximal paths")
    return BoundedVerdict("inconclusive", False, len(ps), time.monotonic() - t0,
                          "quantifier alternation with unexplored paths")


# -- the iterative loop -------------------------------------------------------------------------

@dataclass
class RepairConfig:
    bounds: Bounds = field(default_factory=Bounds)
    max_iters: int = 10
    timeout: float = DEFAULT_TIMEOUT
    solver_cmd: str = DEFAULT_SOLVER_CMD
    grammars: Mapping = field(default_factory=dict)  # location index (1-based) -> grammar text
    args: Optional[tuple] = None
    workdir: Optional[str] = None
    domain: Optional[FiniteDomain] = None  # oracle domain for final checks and preserved-input evidence
    solver_prune: bool = False
    logic: str = "ALL"

    def __post_init__(self):
        if self.max_iters < 0 or self.timeout <= 0:
            raise ValueError("max_iters must be non-negative and timeout positive")


@dataclass
class IterationRecord:
    iteration: int
    patch: list  # printed expressions
    size: int
    solver_time: float
    recheck: str
    preserved: Optional[int] = None


@dataclass
class RepairReport:
    name: str
    status: str  # "repaired" | "no-repair-needed" | "no-repair" | "failed"
    stop_reason: str  # "optimal" | "timeout" | "iteration-cap" | "single-query" | ...
    iterations: int  # accepted improvement rounds
    locations: int
    log: list = field(default_factory=list)
    final_source: str = ""
    final_patch: list = field(default_factory=list)
    final_size: int = 0
    bounded: Optional[dict] = None
    deeper: Optional[dict] = None
    oracle: Optional[str] = None
    monotone: Optional[bool] = None
    paths: int = 0
    elapsed: float = 0.0
    constraint_files: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def default_grammars(sk: Skeleton, p: Program, phi: F.HyperLTL) -> list:
    strings = sorted({c.value for c in literals(p) if c.sort == Sort.STRING} | {
        n.value for a in phi.atoms() for n in walk(a) if isinstance(n, Const) and n.sort == Sort.STRING})
    return [default_grammar(sort, params, strings) for _, params, sort in sk.functions]


def _problem(sk: Skeleton, grammars: Sequence[Grammar], constraint: Expr, logic: str) -> SygusProblem:
    funs = tuple(SynthFun(n, ps, s, g) for (n, ps, s), g in zip(sk.functions, grammars))
    return SygusProblem(funs, simplify(constraint), logic)


def iterative_repair(p: Program, phi: F.HyperLTL, cfg: RepairConfig = RepairConfig(), name: str = "program") -> RepairReport:
    t0 = time.monotonic()
    sk = instrument(p, cfg.args)
    report = RepairReport(name, "failed", "", 0, len(sk.functions))
    initial = verify_bounded(p, phi, cfg.bounds)
    if initial.status == "holds-bounded":
        report.status = "no-repair-needed"
        report.final_source = program_str(p)
        report.final_patch = [expr_str(e) for e in sk.original]
        report.final_size = sum(size(e) for e in sk.original)
        report.bounded = asdict(initial)
        report.elapsed = time.monotonic() - t0
        return report

    grammars = default_grammars(sk, p, phi)
    for k, text in cfg.grammars.items():
        grammars[int(k) - 1] = parse_grammar(text, sk.functions[int(k) - 1][1])
    ps = explore_paths(sk.program, cfg.bounds)
    paths = _paths_for(phi, ps)
    report.paths = len(paths)
    variables = p.variables
    outputs = p.output_vars
    nsa = ltl_to_nsa(phi.body)
    enc = build_enc(phi, paths, variables, nsa)

    def run(constraint, tag):
        problem = _problem(sk, grammars, constraint, cfg.logic)
        res = solve(problem, cfg.timeout, cfg.solver_cmd, cfg.workdir, tag)
        if res.file and cfg.workdir:
            report.constraint_files.append(res.file)
        return res

    first = run(enc, "iter0")
    if first.status == "unsat":
        report.status, report.stop_reason = "no-repair", "infeasible within grammar and bounds"
        report.elapsed = time.monotonic() - t0
        return report
    if first.status == "unknown":
        report.status, report.stop_reason = "failed", "solver unknown on the initial query"
        report.elapsed = time.monotonic() - t0
        return report

    best = first.candidate
    report.log.append(_record(0, best, p, sk, cfg.domain))
    original_defs = sk.definitions(sk.original)
    paths_p = [x.instantiate(original_defs) for x in paths]
    stop = "iteration-cap" if cfg.max_iters else "single-query"
    for it in range(1, cfg.max_iters + 1):
        paths_s = [x.instantiate(best.definitions()) for x in paths]
        it_term = build_iter(paths_p, paths_s, paths, outputs, variables, shared=True, solver_prune=cfg.solver_prune)
        res = run(conj(enc, it_term), f"iter{it}")
        if res.status == "unsat":
            stop = "optimal"
            break
        if res.status == "unknown":
            stop = "timeout"
            break
        best = res.candidate
        best.iteration = it
        report.iterations = it
        report.log.append(_record(it, best, p, sk, cfg.domain))

    final = apply_patch(sk, best.exprs)
    report.status = "repaired"
    report.stop_reason = stop
    report.final_source = program_str(final)
    report.final_patch = [expr_str(e) for e in best.exprs]
    report.final_size = best.size
    report.bounded = asdict(verify_bounded(final, phi, cfg.bounds))
    report.deeper = asdict(verify_bounded(final, phi, cfg.bounds.deeper()))
    if cfg.domain is not None:
        try:
            report.oracle = "satisfied" if oracle_check_hyperltl(final, phi, cfg.domain) else "violated"
        except Inconclusive:
            report.oracle = "inconclusive"
        counts = [r.preserved for r in report.log]
        report.monotone = all(a < b for a, b in zip(counts, counts[1:]))
    report.elapsed = time.monotonic() - t0
    return report


def _record(it: int, cand: RepairCandidate, p: Program, sk: Skeleton, dom: Optional[FiniteDomain]) -> IterationRecord:
    preserved = None
    if dom is not None:
        try:
            preserved = len(oracle_preserved_inputs(p, apply_patch(sk, cand.exprs), p.output_vars, dom))
        except Inconclusive:
            preserved = None
    return IterationRecord(it, [expr_str(e) for e in cand.exprs], cand.size, round(cand.solver_time, 3),
                           cand.recheck, preserved)


def report_table(reports: Sequence[RepairReport]) -> str:
    rows = [("Instance", "#Iter", "#Locations", "t", "Size", "Status")]
    for r in reports:
        rows.append((r.name, str(r.iterations), str(r.locations), f"{r.elapsed:.1f}", str(r.final_size),
                     f"{r.status}/{r.stop_reason}" if r.stop_reason else r.status))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows) + "\n"
