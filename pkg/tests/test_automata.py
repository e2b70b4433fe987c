"""Automaton algebra and the path-counting helpers."""

import random

import pytest

from fixtures_families import (
    a_star_dfa,
    brute_words,
    empty_language_dfa,
    even_length_dfa,
    random_dfa,
    random_nfa,
    sigma_star_dfa,
)
from unamb.automata import (
    AutomatonError,
    Automaton,
    automaton_to_right_linear,
    check_unambiguous_nfa,
    concat_automata,
    count_accepting_paths,
    dfa_complement,
    disjoint_union_automata,
    parse_automaton,
    print_automaton,
    product_automaton,
    shortest_accepted_word,
    shortest_rejected_word,
    single_initial,
    subset_oracle_inclusion,
    totalize,
    trim_automaton,
)
from unamb.alphabet import Alphabet
from unamb.grammar import bounded_language


def test_parse_print_round_trip():
    a = even_length_dfa()
    b = parse_automaton(print_automaton(a))
    assert b.states == a.states
    assert b.transitions == a.transitions
    assert b.initial == a.initial and b.accepting == a.accepting


def test_parse_rejects_bad_files():
    with pytest.raises(ValueError):
        parse_automaton("states: p\ninitial: p\naccepting: p\n")  # no alphabet
    with pytest.raises(ValueError):
        parse_automaton("alphabet: a\nstates: p\ninitial: q\naccepting: p\n")


def test_determinism_flags():
    assert sigma_star_dfa().is_deterministic
    nfa = Automaton(
        Alphabet(("a",)), ("p", "q"), ("p",), ("q",),
        (("p", 0, "p"), ("p", 0, "q")),
    )
    assert not nfa.is_deterministic
    assert nfa.klass == "NFA"


def test_totalize_and_complement():
    rng = random.Random(11)
    for _ in range(20):
        a = random_dfa(rng)
        t = totalize(a)
        assert t.is_total and t.is_deterministic
        comp = dfa_complement(t)
        words = brute_words(a, 5)
        comp_words = brute_words(comp, 5)
        for w in _all_words(2, 5):
            assert (w in words) != (w in comp_words)


def _all_words(k, max_len):
    out = [()]
    frontier = [()]
    for _ in range(max_len):
        frontier = [w + (c,) for w in frontier for c in range(k)]
        out.extend(frontier)
    return out


def test_product_is_intersection():
    rng = random.Random(12)
    for _ in range(20):
        a, b = random_nfa(rng), random_nfa(rng)
        p = product_automaton(a, b)
        wa, wb, wp = brute_words(a, 4), brute_words(b, 4), brute_words(p, 4)
        assert wp == (wa & wb)


def test_disjoint_union_is_union():
    rng = random.Random(13)
    for _ in range(20):
        a, b = random_nfa(rng), random_nfa(rng)
        u = disjoint_union_automata(a, b)
        assert brute_words(u, 4) == brute_words(a, 4) | brute_words(b, 4)


def test_concat_is_concatenation():
    rng = random.Random(14)
    for _ in range(15):
        a, b = random_dfa(rng, 3), random_dfa(rng, 3)
        c = concat_automata(a, b)
        # enumerate both factors to the full length so no split is missed
        wa, wb = brute_words(a, 6), brute_words(b, 6)
        expect = {u + v for u in wa for v in wb if len(u) + len(v) <= 6}
        assert brute_words(c, 6) == expect


def test_subset_oracle_against_brute_force():
    rng = random.Random(15)
    for _ in range(40):
        a, b = random_nfa(rng, 4), random_nfa(rng, 4)
        holds, witness = subset_oracle_inclusion(a, b)
        wa, wb = brute_words(a, 6), brute_words(b, 6)
        if holds:
            assert wa <= wb
            assert witness is None
        else:
            assert a.accepts(witness) and not b.accepts(witness)


def test_unambiguity_of_machines():
    ok, w = check_unambiguous_nfa(sigma_star_dfa())
    assert ok and w is None
    two_paths = Automaton(
        Alphabet(("a",)), ("p", "q", "r"), ("p",), ("r",),
        (("p", 0, "q"), ("p", 0, "r"), ("q", 0, "r"), ("r", 0, "r")),
    )
    ok, w = check_unambiguous_nfa(two_paths)
    assert not ok
    # every accepting computation of w splits at least two ways
    assert w is not None and len(w) >= 1


def test_count_accepting_paths_equals_word_counts_on_dfa():
    a = a_star_dfa()
    counts = count_accepting_paths(a, 6)
    assert counts == [1] * 7  # exactly one all-a word per length


def test_shortest_words():
    assert shortest_accepted_word(even_length_dfa()) == ()
    assert shortest_rejected_word(even_length_dfa(), 4) == (0,)
    assert shortest_accepted_word(empty_language_dfa()) is None
    assert shortest_rejected_word(sigma_star_dfa(), 4) is None


def test_trim_preserves_language():
    a = Automaton(
        Alphabet(("a",)), ("p", "q", "dead"), ("p",), ("q",),
        (("p", 0, "q"), ("dead", 0, "dead")),
    )
    t = trim_automaton(a)
    assert "dead" not in t.states
    assert brute_words(t, 4) == brute_words(a, 4)


def test_single_initial():
    rng = random.Random(16)
    for _ in range(10):
        a = random_nfa(rng)
        s = single_initial(a)
        assert len(s.initial) == 1
        assert brute_words(s, 5) == brute_words(a, 5)


def test_right_linear_grammar_matches_machine():
    rng = random.Random(17)
    for _ in range(15):
        a = random_nfa(rng, 4)
        g = automaton_to_right_linear(a)
        rows = bounded_language(g, 5)[g.start]
        words = brute_words(a, 5)
        for n in range(6):
            got = {c for c in rows[n]}
            expect = set()
            for w in words:
                if len(w) == n:
                    code = 0
                    for letter in w:
                        code = code * 2 + letter
                    expect.add(code)
            assert got == expect
