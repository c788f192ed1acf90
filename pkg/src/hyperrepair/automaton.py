"""Formula-expansion tableau from safety LTL bodies to nondeterministic safety automata.

A state is a set of obligations (subformulas that must hold from the current
position on).  Expanding a state yields local choices: a partial assignment to
the atoms (a cube) and the obligations for the next position.  A word is
accepted iff the automaton has a run of the word's length; reaching the end of
the word discharges every pending obligation, matching the finite-trace rule.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .lang import formula as F
from .lang.printer import body_str, expr_str

MAX_ATOMS = 16


class FragmentError(ValueError):
    pass


def _key(b: F.Body) -> str:
    return body_str(b)


def _canon(obligations: Iterable[F.Body]) -> tuple:
    uniq = {_key(b): b for b in obligations if b != F.TT}
    return tuple(uniq[k] for k in sorted(uniq))


def _expand(obligations: Sequence[F.Body]) -> list:
    """Local choices ``(cube, next_obligations)``; the cube maps atoms to required values."""
    results = []
    # each work item: (pending, cube, nxt)
    work = [(list(obligations), {}, [])]
    while work:
        pending, cube, nxt = work.pop()
        while pending:
            b = pending.pop()
            if isinstance(b, F.LTrue):
                continue
            if isinstance(b, F.LFalse):
                break
            if isinstance(b, F.Lit):
                have = cube.get(b.atom)
                if have is not None and have != b.positive:
                    break
                cube = {**cube, b.atom: b.positive}
            elif isinstance(b, F.And):
                pending.extend(b.args)
            elif isinstance(b, F.Next):
                nxt = nxt + [b.sub]
            elif isinstance(b, F.Or):
                for alt in b.args[1:]:
                    work.append((pending + [alt], cube, nxt))
                pending.append(b.args[0])
            elif isinstance(b, F.WUntil):
                # b.left W b.right  ==  b.right  or  (b.left and X(b.left W b.right))
                work.append((pending + [b.left], cube, nxt + [b]))
                pending.append(b.right)
            else:
                raise FragmentError(f"not a safety body: {b!r}")
        else:
            results.append((cube, _canon(nxt)))
    # deterministic order, duplicates dropped
    seen = {}
    for cube, nxt in results:
        k = (tuple(sorted((expr_str(a), v) for a, v in cube.items())), tuple(_key(b) for b in nxt))
        seen.setdefault(k, (cube, nxt))
    return [seen[k] for k in sorted(seen)]


@dataclass(frozen=True)
class Nsa:
    atoms: tuple  # F in canonical order
    states: tuple  # obligation tuples; index = state number
    initial: tuple  # state numbers
    edges: tuple  # (src, cube, dst); cube = ((atom index, value), ...) sorted by index

    @property
    def transitions(self) -> list:
        """Edges expanded to total letters, as ``(src, letter, dst)`` with letter a bool tuple."""
        out = set()
        n = len(self.atoms)
        for src, cube, dst in self.edges:
            fixed = dict(cube)
            free = [i for i in range(n) if i not in fixed]
            for bits in itertools.product((False, True), repeat=len(free)):
                letter = [False] * n
                for i, v in fixed.items():
                    letter[i] = v
                for i, v in zip(free, bits):
                    letter[i] = v
                out.add((src, tuple(letter), dst))
        return sorted(out)

    def successors(self, q: int, letter: Sequence[bool]) -> set:
        return {
            dst for src, cube, dst in self.edges
            if src == q and all(letter[i] == v for i, v in cube)
        }

    def edges_from(self, q: int) -> list:
        return [(cube, dst) for src, cube, dst in self.edges if src == q]

    def dump(self) -> str:
        lines = ["atoms: " + ", ".join(f"a{i}={expr_str(a)}" for i, a in enumerate(self.atoms))]
        for i, st in enumerate(self.states):
            tag = " initial" if i in self.initial else ""
            lines.append(f"state {i}{tag}: {{{', '.join(body_str(b) for b in st)}}}")
        for src, cube, dst in self.edges:
            label = " & ".join(("" if v else "!") + f"a{i}" for i, v in cube) or "true"
            lines.append(f"{src} -[{label}]-> {dst}")
        return "\n".join(lines) + "\n"


def ltl_to_nsa(body: F.Body) -> Nsa:
    if not F.is_safety_nnf(body):
        raise FragmentError("body is outside the safety fragment")
    atoms = tuple(F.atoms(body))
    if len(atoms) > MAX_ATOMS:
        raise FragmentError(f"{len(atoms)} atoms exceed the limit of {MAX_ATOMS} (alphabet 2^|F|)")
    pos = {a: i for i, a in enumerate(atoms)}
    start = _canon([body])
    index = {tuple(_key(b) for b in start): 0}
    states = [start]
    edges = []
    frontier = [0]
    while frontier:
        q = frontier.pop(0)
        for cube, nxt in _expand(states[q]):
            k = tuple(_key(b) for b in nxt)
            if k not in index:
                index[k] = len(states)
                states.append(nxt)
                frontier.append(index[k])
            edges.append((q, tuple(sorted((pos[a], v) for a, v in cube.items())), index[k]))
    return Nsa(atoms, tuple(states), (0,), tuple(edges))


def nsa_accepts(a: Nsa, word: Sequence) -> bool:
    """``word`` is a sequence of letters; a letter is a bool tuple over ``a.atoms`` or an atom->bool mapping."""
    current = set(a.initial)
    for letter in word:
        if isinstance(letter, dict):
            letter = tuple(letter[x] for x in a.atoms)
        if len(letter) != len(a.atoms):
            raise ValueError("letter does not assign every atom")
        current = set().union(*(a.successors(q, letter) for q in current)) if current else set()
        if not current:
            return False
    return bool(current)
