"""Regenerate the Boolean-conjunction scalability programs of the benchmark corpus."""

import argparse
import json
from pathlib import Path

CORPUS = Path(__file__).resolve().parent.parent / "src" / "hyperrepair" / "corpus"
# (iterations, final size) for n = 0..5; larger n are recorded only
EXPECTED = {0: (0, 1), 1: (0, 1), 2: (1, 3), 3: (2, 5), 4: (3, 7), 5: (4, 9)}


def program(n: int) -> str:
    public = [f"i{k}" for k in range(1, n + 1)]
    rhs = " && ".join(public + ["s"])
    return (
        f"bool {', '.join(public + ['s', 'o'])};\n"
        "output o;\n"
        f"@repair o = {rhs};\n"
        "observe;\n"
    )


def spec(n: int) -> str:
    same = " && ".join(f"i{k}[p1] == i{k}[p2]" for k in range(1, n + 1))
    goal = "o[p1] == o[p2]"
    return f"forall p1. forall p2. {f'({same}) -> ' if same else ''}{goal}\n"


def grammar(n: int) -> list:
    leaves = " ".join([f"i{k}" for k in range(1, n + 1)] + ["s"] + (["true"] if n == 0 else []))
    return ["((B Bool))", f"((B Bool ({leaves} (and B B))))"]


def entry(n: int) -> dict:
    iters, size = EXPECTED.get(n, (None, None))
    patch = " && ".join(f"i{k}" for k in range(1, n)) if n >= 2 else ("i1" if n == 1 else "true")
    e = {
        "name": f"conj{n}",
        "family": "scalability",
        "program": f"conj{n}.imp",
        "spec": f"conj{n}.hltl",
        "iterations": iters,
        "size": size,
        "patch": [patch],
        "domain": "int:0..0",
        "grammars": {"1": grammar(n)},
        "timeout": 120.0 if n >= 6 else 30.0,
        "record_only": n >= 6,
    }
    return e


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=7)
    ns = ap.parse_args()
    manifest_path = CORPUS / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else []
    manifest = [e for e in manifest if e["family"] != "scalability"]
    for n in range(ns.max_n + 1):
        (CORPUS / f"conj{n}.imp").write_text(program(n))
        (CORPUS / f"conj{n}.hltl").write_text(spec(n))
        manifest.append(entry(n))
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
