"""Command-line front end: repair, verify, oracle, emit-sygus and bench."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from typing import Optional

from .automaton import FragmentError, ltl_to_nsa
from .corpus import Benchmark, load_corpus
from .encode import build_enc, build_iter, build_trans
from .lang.expr import SortError, conj
from .lang.parser import ParseError, parse_expr, parse_formula, parse_program
from .lang.program import repair_locations
from .repair import (
    RepairConfig, RepairError, RepairReport, default_grammars, instrument, iterative_repair, report_table,
    verify_bounded,
)
from .semantics import Inconclusive, oracle_check_hyperltl, parse_domain, violating_inputs
from .symexec import Bounds, dump_paths, explore_paths
from .synth import DEFAULT_SOLVER_CMD, DEFAULT_TIMEOUT, SolverError, SygusProblem, SynthFun, parse_grammar, serialize_sygus

log = logging.getLogger("hyperrepair")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def _load(ns) -> tuple:
    p = parse_program(_read(ns.program))
    phi = parse_formula(_read(ns.spec), p.sorts)
    return p, phi


def _bounds(ns) -> Bounds:
    return Bounds(unroll=ns.depth)


def _grammars(ns) -> dict:
    out = {}
    for item in ns.grammar or []:
        loc, _, path = item.partition("=")
        if not path or not loc.isdigit():
            raise ConfigError(f"--grammar expects LOC=FILE, got '{item}'")
        out[int(loc)] = _read(path)
    return out


def _out_dir(ns) -> Optional[str]:
    if ns.out:
        os.makedirs(ns.out, exist_ok=True)
    return ns.out


def _write(ns, name: str, text: str) -> None:
    if ns.out:
        with open(os.path.join(ns.out, name), "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(ns, p, phi) -> None:
    _out_dir(ns)
    if getattr(ns, "dump_automaton", False):
        _write(ns, "automaton.txt", ltl_to_nsa(phi.body).dump())
    if getattr(ns, "dump_paths", False):
        target = instrument(p).program if repair_locations(p) else p
        _write(ns, "paths.txt", dump_paths(explore_paths(target, _bounds(ns))))


# -- sub-commands ---------------------------------------------------------------------------

def cmd_repair(ns) -> int:
    p, phi = _load(ns)
    _dumps(ns, p, phi)
    cfg = RepairConfig(
        bounds=_bounds(ns),
        max_iters=ns.max_iters,
        timeout=ns.timeout,
        solver_cmd=ns.solver_cmd,
        grammars=_grammars(ns),
        args=tuple(ns.args.split(",")) if ns.args else None,
        workdir=ns.out if ns.emit_constraints else None,
        domain=parse_domain(ns.domain, p, phi) if ns.domain else None,
    )
    report = iterative_repair(p, phi, cfg, os.path.splitext(os.path.basename(ns.program))[0])
    if ns.out:
        _write(ns, "report.json", report.to_json())
        if report.final_source:
            _write(ns, "repaired.imp", report.final_source)
    else:
        sys.stdout.write(report.to_json() + "\n")
    if report.status in ("repaired", "no-repair-needed"):
        return EXIT_OK
    return EXIT_FAIL


def cmd_verify(ns) -> int:
    p, phi = _load(ns)
    _dumps(ns, p, phi)
    v = verify_bounded(p, phi, _bounds(ns), ns.timeout)
    print(json.dumps(asdict(v), indent=2))
    return {"holds-bounded": EXIT_OK, "violated": EXIT_FAIL}.get(v.status, EXIT_INCONCLUSIVE)


def cmd_oracle(ns) -> int:
    p, phi = _load(ns)
    _dumps(ns, p, phi)
    dom = parse_domain(ns.domain or "lexicon", p, phi)
    try:
        ok = oracle_check_hyperltl(p, phi, dom)
    except Inconclusive as exc:
        print(json.dumps({"verdict": "inconclusive", "store": exc.store}, default=str))
        return EXIT_INCONCLUSIVE
    out = {"verdict": "satisfied" if ok else "violated", "stores": dom.size(p)}
    if not ok and phi.universal:
        out["violating_inputs"] = len(violating_inputs(p, phi, dom))
    print(json.dumps(out, indent=2))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_emit_sygus(ns) -> int:
    """Write the SyGuS problem for the chosen encoding without solving it."""
    p, phi = _load(ns)
    sk = instrument(p, tuple(ns.args.split(",")) if ns.args else None)
    grammars = default_grammars(sk, p, phi)
    for k, text in _grammars(ns).items():
        grammars[k - 1] = parse_grammar(text, sk.functions[k - 1][1])
    ps = explore_paths(sk.program, _bounds(ns))
    paths = list(ps.paths) if phi.universal else ps.maximal
    enc = build_enc(phi, paths, p.variables)
    if ns.encoding == "enc":
        constraint = enc
    elif ns.encoding == "trans":
        original = [x.instantiate(sk.definitions(sk.original)) for x in paths]
        constraint = conj(enc, build_trans(phi, original, paths, p.output_vars, p.variables, shared=True))
    else:
        if not ns.patch:
            raise ConfigError("--encoding iter needs --patch with the previous candidate")
        prev = [parse_expr(t, p.sorts) for t in ns.patch]
        original = [x.instantiate(sk.definitions(sk.original)) for x in paths]
        current = [x.instantiate(sk.definitions(prev)) for x in paths]
        constraint = conj(enc, build_iter(original, current, paths, p.output_vars, p.variables, shared=True))
    funs = tuple(SynthFun(n, ps_, s, g) for (n, ps_, s), g in zip(sk.functions, grammars))
    text = serialize_sygus(SygusProblem(funs, constraint))
    if ns.out:
        os.makedirs(os.path.dirname(os.path.abspath(ns.out)), exist_ok=True)
        with open(ns.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def run_benchmark(b: Benchmark, solver_cmd: str = DEFAULT_SOLVER_CMD, timeout: Optional[float] = None,
                  workdir: Optional[str] = None):
    p, phi = b.load()
    cfg = RepairConfig(
        bounds=b.bounds(),
        max_iters=0 if b.mode == "direct" else 10,
        timeout=timeout or b.timeout,
        solver_cmd=solver_cmd,
        grammars=b.grammars,
        args=b.args,
        workdir=os.path.join(workdir, b.name) if workdir else None,
        domain=b.oracle_domain(p, phi),
    )
    return iterative_repair(p, phi, cfg, b.name)


def _bench_job(args):
    b, solver_cmd, timeout, workdir = args
    try:
        return run_benchmark(b, solver_cmd, timeout, workdir)
    except SolverError as exc:
        log.warning("%s: solver error: %s", b.name, str(exc).splitlines()[0])
        return RepairReport(b.name, "failed", "solver-error", 0, len(repair_locations(b.load()[0])))


def cmd_bench(ns) -> int:
    families = ns.families or ["iterative", "scalability", "ksafety", "functional"]
    todo = [b for f in families for b in load_corpus(f)]
    if ns.only:
        todo = [b for b in todo if b.name in set(ns.only.split(","))]
    if not todo:
        raise ConfigError(f"no benchmarks in families {families}")
    jobs = [(b, ns.solver_cmd, ns.timeout, ns.out) for b in todo]
    if ns.jobs > 1:
        with ProcessPoolExecutor(ns.jobs) as ex:
            reports = list(ex.map(_bench_job, jobs))
    else:
        reports = []
        for j in jobs:
            log.info("running %s", j[0].name)
            reports.append(_bench_job(j))
    table = report_table(reports)
    if ns.out:
        os.makedirs(ns.out, exist_ok=True)
        with open(os.path.join(ns.out, "bench.json"), "w") as fh:
            json.dump([asdict(r) for r in reports], fh, indent=2)
        with open(os.path.join(ns.out, "bench.txt"), "w") as fh:
            fh.write(table)
    sys.stdout.write(table)
    return EXIT_OK if all(r.status in ("repaired", "no-repair-needed") for r in reports) else EXIT_FAIL


# -- argument parsing --------------------------------------------------------------------------

def _common(ap: argparse.ArgumentParser, needs_spec: bool = True) -> None:
    ap.add_argument("--program", required=True, help="program file")
    if needs_spec:
        ap.add_argument("--spec", required=True, help="HyperLTL formula file")
    ap.add_argument("--depth", type=int, default=3, help="loop unrolling bound (default 3)")
    ap.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="per-query timeout in seconds")
    ap.add_argument("--dump-paths", action="store_true", help="print the explored symbolic paths")
    ap.add_argument("--dump-automaton", action="store_true", help="print the safety automaton of the body")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperrepair", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("repair", help="iteratively repair the @repair locations of a program")
    _common(r)
    r.add_argument("--max-iters", type=int, default=10)
    r.add_argument("--solver-cmd", default=DEFAULT_SOLVER_CMD, help="solver command template with {file}")
    r.add_argument("--grammar", action="append", metavar="LOC=FILE", help="grammar override for a location")
    r.add_argument("--args", help="comma-separated argument list for the synthesis symbols")
    r.add_argument("--domain", help="finite domain for the final oracle check, e.g. lexicon or 'int:0..2'")
    r.add_argument("--out", help="output directory for report.json and repaired.imp")
    r.add_argument("--emit-constraints", action="store_true", help="keep every SyGuS query in --out")
    r.set_defaults(func=cmd_repair)

    v = sub.add_parser("verify", help="bounded verification of a hole-free program")
    _common(v)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exhaustive check over a finite input domain")
    _common(o)
    o.add_argument("--domain", default="lexicon")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("emit-sygus", help="write the SyGuS query without solving it")
    _common(e)
    e.add_argument("--encoding", choices=("enc", "trans", "iter"), default="enc")
    e.add_argument("--patch", action="append", help="previous candidate, one expression per location (iter)")
    e.add_argument("--grammar", action="append", metavar="LOC=FILE")
    e.add_argument("--args")
    e.add_argument("--out", help="target .sy file")
    e.set_defaults(func=cmd_emit_sygus)

    b = sub.add_parser("bench", help="run the shipped benchmark corpus")
    b.add_argument("families", nargs="*", choices=("iterative", "scalability", "ksafety", "functional"))
    b.add_argument("--only", help="comma-separated benchmark names")
    b.add_argument("--timeout", type=float, default=None, help="override per-query timeouts")
    b.add_argument("--solver-cmd", default=DEFAULT_SOLVER_CMD)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", help="directory for bench.json, bench.txt and SyGuS queries")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return ns.func(ns)
    except (ConfigError, ParseError, SortError, FragmentError, RepairError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
