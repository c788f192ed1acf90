"""Shared state for the test session: acceptance lines and cached corpus runs."""

import functools

from hyperrepair.cli import run_benchmark
from hyperrepair.corpus import get

ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Remember one pass/fail line for the acceptance summary."""
    ACCEPTANCE[criterion] = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"


@functools.lru_cache(maxsize=None)
def benchmark_report(name: str):
    """Run a corpus benchmark once per session."""
    return run_benchmark(get(name))
