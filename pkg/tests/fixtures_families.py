"""Shared machines, grammars, and seeded random generators for the tests."""

from __future__ import annotations

import random

from unamb.alphabet import Alphabet
from unamb.automata import Automaton, check_unambiguous_nfa
from unamb.grammar import Grammar, check_unambiguous_bounded, is_language_empty, parse_grammar

# ---------------------------------------------------------------------------
# grammars


def dyck_grammar() -> Grammar:
    return parse_grammar("alphabet: a b\nstart: S\nS -> a S b S | eps\n")


def universal_grammar() -> Grammar:
    # derives every word over {a, b}; deterministic, hence unambiguous
    return parse_grammar("alphabet: a b\nstart: S\nS -> a S | b S | eps\n")


def doubling_grammar(n: int, start: str) -> Grammar:
    """X_k derives only a^(2^k); Y_k derives exactly the shorter words
    a^0 .. a^(2^k - 1).  `start` selects the axiom."""
    lines = ["alphabet: a", f"start: {start}", "X0 -> a", "Y0 -> eps"]
    for k in range(n):
        lines.append(f"X{k + 1} -> X{k} X{k}")
        lines.append(f"Y{k + 1} -> Y{k} | X{k} Y{k}")
    return parse_grammar("\n".join(lines) + "\n")


def single_word_grammar(n: int) -> Grammar:
    return doubling_grammar(n, f"X{n}")


def below_power_grammar(n: int) -> Grammar:
    return doubling_grammar(n, f"Y{n}")


def is_dyck_word(word: tuple[int, ...]) -> bool:
    """Independent membership predicate: 0 opens, 1 closes."""
    depth = 0
    for c in word:
        depth += 1 if c == 0 else -1
        if depth < 0:
            return False
    return depth == 0


# ---------------------------------------------------------------------------
# automata


def _machine(letters: str, n_states: int, initial, accepting, triples) -> Automaton:
    states = tuple(f"q{i}" for i in range(n_states))
    return Automaton(
        Alphabet(tuple(letters)),
        states,
        tuple(f"q{i}" for i in initial),
        tuple(f"q{i}" for i in accepting),
        tuple((f"q{p}", a, f"q{q}") for p, a, q in triples),
    )


def sigma_star_dfa(letters: str = "ab") -> Automaton:
    return _machine(letters, 1, [0], [0], [(0, a, 0) for a in range(len(letters))])


def a_star_dfa() -> Automaton:
    # words over {a, b} using only the letter a
    return _machine("ab", 2, [0], [0], [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 1)])


def even_length_dfa() -> Automaton:
    return _machine(
        "ab", 2, [0], [0],
        [(0, a, 1) for a in range(2)] + [(1, a, 0) for a in range(2)],
    )


def empty_language_dfa() -> Automaton:
    return _machine("ab", 1, [0], [], [(0, 0, 0), (0, 1, 0)])


def random_dfa(rng: random.Random, max_states: int = 5, letters: str = "ab") -> Automaton:
    n = rng.randint(1, max_states)
    k = len(letters)
    triples = [(p, a, rng.randrange(n)) for p in range(n) for a in range(k)]
    accepting = [q for q in range(n) if rng.random() < 0.5]
    return _machine(letters, n, [0], accepting, triples)


def random_nfa(rng: random.Random, max_states: int = 5, letters: str = "ab") -> Automaton:
    n = rng.randint(1, max_states)
    k = len(letters)
    triples = [
        (p, a, q)
        for p in range(n)
        for a in range(k)
        for q in range(n)
        if rng.random() < 0.35
    ]
    initial = sorted({0} | {q for q in range(n) if rng.random() < 0.2})
    accepting = [q for q in range(n) if rng.random() < 0.5]
    return _machine(letters, n, initial, accepting, triples)


def random_ufa(rng: random.Random, max_states: int = 5, letters: str = "ab") -> Automaton:
    """Rejection-sampled unambiguous automaton (DFAs also qualify)."""
    while True:
        a = random_nfa(rng, max_states, letters)
        ok, _ = check_unambiguous_nfa(a)
        if ok:
            return a


def brute_words(a: Automaton, max_len: int) -> set[tuple[int, ...]]:
    k = len(a.alphabet)
    out: set[tuple[int, ...]] = set()
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(max_len + 1):
        nxt = []
        for w in frontier:
            if a.accepts(w):
                out.add(w)
            if len(w) < max_len:
                nxt.extend(w + (c,) for c in range(k))
        frontier = nxt
        if not frontier:
            break
    return out


# ---------------------------------------------------------------------------
# random short-GNF grammars


def random_short_gnf(rng: random.Random, max_nts: int = 6, letters: str = "ab") -> Grammar:
    n_nts = rng.randint(1, max_nts)
    names = [f"N{i}" for i in range(n_nts)]
    k = len(letters)
    productions: dict[str, list[tuple[str, ...]]] = {}
    for x in names:
        bodies: list[tuple[str, ...]] = []
        if rng.random() < 0.4:
            bodies.append(())
        # at most one body per letter keeps the candidate plausible
        for a in range(k):
            if rng.random() < 0.6:
                bodies.append((letters[a], rng.choice(names), rng.choice(names)))
        productions[x] = bodies
    text = [f"alphabet: {' '.join(letters)}", f"start: {names[0]}"]
    for x in names:
        alts = " | ".join(" ".join(b) if b else "eps" for b in productions[x]) or ""
        text.append(f"{x} -> {alts}" if alts else f"{x} ->")
    return parse_grammar("\n".join(text) + "\n")


def random_unambiguous_short_gnf(
    rng: random.Random, max_nts: int = 6, letters: str = "ab", check_bound: int = 10
) -> Grammar:
    """Rejection sampling against the derivation-count spot check; the
    returned grammar has a nonempty language."""
    while True:
        g = random_short_gnf(rng, max_nts, letters)
        if is_language_empty(g):
            continue
        if check_unambiguous_bounded(g, check_bound).ok:
            return g


# ---------------------------------------------------------------------------
# square-root-sum instances


def random_square_instance(rng: random.Random) -> tuple[int, list[int], str]:
    """Raw instance whose radicands are perfect squares and whose
    comparison has a nonzero margin, so every decision is strict."""
    count = rng.randint(2, 5)
    roots = [rng.randint(0, 6) for _ in range(count)]
    total = sum(roots)
    margin = 1 + rng.randrange(3)
    d0 = max(0, total + rng.choice((-1, 1)) * margin)
    if d0 == total:  # clipped into a tie; push above instead
        d0 = total + margin
    op = rng.choice(("<=", "<", ">", ">="))
    return d0, [r * r for r in roots], op
