"""Benchmark programs, specifications and expected outcomes shipped as package data."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from ..lang import formula as F
from ..lang.parser import parse_expr, parse_formula, parse_program
from ..lang.program import Program
from ..semantics import FiniteDomain, parse_domain
from ..symexec import Bounds


@dataclass(frozen=True)
class Benchmark:
    name: str
    family: str  # iterative | scalability | ksafety | functional
    program: str  # file name inside the corpus
    spec: str
    mode: str = "iterative"  # iterative | direct
    iterations: Optional[int] = None  # expected improvement rounds
    size: Optional[int] = None  # expected final patch size
    patch: tuple = ()  # expected patch expressions, one per location
    domain: str = "lexicon"
    grammars: dict = field(default_factory=dict)  # location index (1-based) -> grammar text
    timeout: float = 120.0
    unroll: int = 3
    args: Optional[tuple] = None
    record_only: bool = False  # run and report, never assert

    def source(self) -> str:
        return _read(self.program)

    def load(self) -> tuple:
        p = parse_program(self.source())
        phi = parse_formula(_read(self.spec), p.sorts)
        return p, phi

    def bounds(self) -> Bounds:
        return Bounds(unroll=self.unroll)

    def oracle_domain(self, p: Program, phi: F.HyperLTL) -> FiniteDomain:
        return parse_domain(self.domain, p, phi)

    def expected_exprs(self, p: Program) -> tuple:
        return tuple(parse_expr(t, p.sorts) for t in self.patch)


def _read(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text()


def load_corpus(family: Optional[str] = None) -> list:
    raw = json.loads(_read("manifest.json"))
    out = []
    for entry in raw:
        grammars = {int(k): "\n".join(v) if isinstance(v, list) else v for k, v in entry.pop("grammars", {}).items()}
        patch = tuple(entry.pop("patch", ()))
        args = entry.pop("args", None)
        b = Benchmark(grammars=grammars, patch=patch, args=tuple(args) if args else None, **entry)
        if family is None or b.family == family:
            out.append(b)
    return out


def get(name: str) -> Benchmark:
    for b in load_corpus():
        if b.name == name:
            return b
    raise KeyError(f"no benchmark named '{name}'")
