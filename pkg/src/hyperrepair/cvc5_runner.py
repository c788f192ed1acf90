"""Command-line SyGuS-IF v2 front end for the cvc5 Python API.

Usage: ``python -m hyperrepair.cvc5_runner [--opt name=value ...] FILE``.

Prints ``(define-fun ...)`` blocks on success, ``infeasible`` when the solver
proves no solution exists, ``fail`` when it gives up and ``unknown`` when the
search was abandoned without an answer.
"""

from __future__ import annotations

import argparse
import io
import sys

import cvc5

DEFAULT_OPTIONS = {
    "sygus": "true",
    "incremental": "false",
    # unsat-core based connective enumeration slows the quantified string queries down a lot
    "sygus-core-connective": "false",
}


# retried once when the default configuration hits an internal error ("bad kind" on some
# string queries with witness constants)
FALLBACK_OPTIONS = {"sygus-eval-unfold": "none"}


def run(path: str, options: dict, out=None) -> int:
    out = out if out is not None else sys.stdout
    tm = cvc5.TermManager()
    solver = cvc5.Solver(tm)
    for k, v in {**DEFAULT_OPTIONS, **options}.items():
        solver.setOption(k, v)
    parser = cvc5.InputParser(solver)
    parser.setFileInput(cvc5.InputLanguage.SYGUS_2_1, path)
    sm = parser.getSymbolManager()
    while True:
        cmd = parser.nextCommand()
        if cmd.isNull():
            break
        text = cmd.invoke(solver, sm)
        if not text and cmd.getCommandName() == "check-synth":
            text = "unknown"  # the search was abandoned, e.g. by sygus-abort-size
        if text:
            out.write(text if text.endswith("\n") else text + "\n")
            out.flush()
    return 0


def run_with_fallback(path: str, options: dict) -> int:
    buf = io.StringIO()
    rc = run(path, options, buf)
    text = buf.getvalue()
    if "(error" in text and "Illegal argument" in text:
        buf = io.StringIO()
        rc = run(path, {**options, **FALLBACK_OPTIONS}, buf)
        text = buf.getvalue()
    sys.stdout.write(text)
    return rc


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m hyperrepair.cvc5_runner")
    ap.add_argument("--opt", action="append", default=[], help="cvc5 option as name=value")
    ap.add_argument("file")
    ns = ap.parse_args(argv)
    options = {}
    for o in ns.opt:
        k, _, v = o.partition("=")
        options[k] = v or "true"
    try:
        return run_with_fallback(ns.file, options)
    except RuntimeError as exc:  # cvc5 raises RuntimeError for parse and logic errors
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
