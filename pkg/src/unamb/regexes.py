"""Regular expressions and the position (Glushkov) automaton.

The constructors build plain syntax trees; no rewriting beyond dropping
epsilon units in concatenations.  Unambiguity of anything built here is
never assumed downstream: consumers run the product-construction check
on the compiled automaton instead.
"""

from __future__ import annotations

from dataclasses import dataclass

from .alphabet import Alphabet
from .automata import Automaton


@dataclass(frozen=True)
class Regex:
    kind: str  # empty | epsilon | letter | union | concat | star
    letter: str | None = None
    left: "Regex | None" = None
    right: "Regex | None" = None


def r_empty() -> Regex:
    return Regex("empty")


def r_eps() -> Regex:
    return Regex("epsilon")


def r_letter(name: str) -> Regex:
    return Regex("letter", letter=name)


def r_union(a: Regex, b: Regex) -> Regex:
    return Regex("union", left=a, right=b)


def r_concat(a: Regex, b: Regex) -> Regex:
    if a.kind == "epsilon":
        return b
    if b.kind == "epsilon":
        return a
    return Regex("concat", left=a, right=b)


def r_star(a: Regex) -> Regex:
    return Regex("star", left=a)


def union_all(parts: list[Regex]) -> Regex:
    if not parts:
        return r_empty()
    out = parts[0]
    for p in parts[1:]:
        out = r_union(out, p)
    return out


def concat_all(parts: list[Regex]) -> Regex:
    out = r_eps()
    for p in parts:
        out = r_concat(out, p)
    return out


def literal_word(letters: tuple[str, ...]) -> Regex:
    return concat_all([r_letter(a) for a in letters])


def power(e: Regex, k: int) -> Regex:
    if k < 0:
        raise ValueError("negative power")
    return concat_all([e] * k)


def print_regex(e: Regex) -> str:
    # precedence: star > concat > union
    def go(e: Regex, level: int) -> str:
        if e.kind == "empty":
            return "<empty>"
        if e.kind == "epsilon":
            return "eps"
        if e.kind == "letter":
            return e.letter
        if e.kind == "star":
            inner = go(e.left, 3)
            return f"{inner}*"
        if e.kind == "concat":
            s = f"{go(e.left, 2)} {go(e.right, 2)}"
            return f"({s})" if level > 2 else s
        s = f"{go(e.left, 1)}|{go(e.right, 1)}"
        return f"({s})" if level > 1 else s

    return go(e, 0)


def _positions(e: Regex) -> list[str]:
    """Letters of all leaf occurrences, in-order."""
    out: list[str] = []

    def walk(e: Regex) -> None:
        if e.kind == "letter":
            out.append(e.letter)
        elif e.kind in ("union", "concat"):
            walk(e.left)
            walk(e.right)
        elif e.kind == "star":
            walk(e.left)

    walk(e)
    return out


def regex_to_nfa(e: Regex, alphabet: Alphabet) -> Automaton:
    """Position automaton: one state per letter occurrence plus a start
    state; word runs correspond to decorated letter-by-letter matches."""
    letters = _positions(e)
    for a in letters:
        if a not in alphabet.letters:
            raise ValueError(f"letter {a!r} not in alphabet")

    counter = [0]

    def analyze(e: Regex):
        """-> (nullable, first, last, follow-pairs), positions numbered
        in the same in-order walk as _positions."""
        if e.kind == "empty":
            return False, frozenset(), frozenset(), []
        if e.kind == "epsilon":
            return True, frozenset(), frozenset(), []
        if e.kind == "letter":
            p = counter[0]
            counter[0] += 1
            return False, frozenset([p]), frozenset([p]), []
        if e.kind == "union":
            n1, f1, l1, fo1 = analyze(e.left)
            n2, f2, l2, fo2 = analyze(e.right)
            return n1 or n2, f1 | f2, l1 | l2, fo1 + fo2
        if e.kind == "concat":
            n1, f1, l1, fo1 = analyze(e.left)
            n2, f2, l2, fo2 = analyze(e.right)
            bridge = [(p, q) for p in l1 for q in f2]
            nullable = n1 and n2
            first = f1 | f2 if n1 else f1
            last = l1 | l2 if n2 else l2
            return nullable, first, last, fo1 + fo2 + bridge
        if e.kind == "star":
            n1, f1, l1, fo1 = analyze(e.left)
            loop = [(p, q) for p in l1 for q in f1]
            return True, f1, l1, fo1 + loop
        raise ValueError(f"unknown regex kind {e.kind!r}")

    nullable, first, last, follow = analyze(e)
    start = "s0"
    states = [start] + [f"p{i + 1}" for i in range(len(letters))]
    transitions = []
    for q in sorted(first):
        transitions.append((start, alphabet.index(letters[q]), f"p{q + 1}"))
    for p, q in sorted(set(follow)):
        transitions.append((f"p{p + 1}", alphabet.index(letters[q]), f"p{q + 1}"))
    accepting = [f"p{q + 1}" for q in sorted(last)]
    if nullable:
        accepting.insert(0, start)
    return Automaton(
        alphabet=alphabet,
        states=tuple(states),
        initial=(start,),
        accepting=tuple(accepting),
        transitions=tuple(transitions),
        klass="NFA",
    )
