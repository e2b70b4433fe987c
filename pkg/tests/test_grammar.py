"""Grammar parsing, counting, and bounded-language machinery."""

import random

import pytest

from fixtures_families import dyck_grammar, is_dyck_word, universal_grammar
from unamb.alphabet import FormatError, decode_word, encode_word
from unamb.grammar import (
    GrammarError,
    InfiniteDerivationsError,
    bounded_language,
    check_unambiguous_bounded,
    count_derivations,
    derivation_totals,
    derives,
    epsilon_tree_counts,
    is_language_empty,
    language_words,
    nullable_set,
    parse_grammar,
    print_grammar,
    trim,
)


def test_parse_print_round_trip():
    g = dyck_grammar()
    again = parse_grammar(print_grammar(g))
    assert again.alphabet == g.alphabet
    assert again.start == g.start
    assert again.productions == g.productions


def test_parse_rejects_missing_sections():
    with pytest.raises(ValueError):
        parse_grammar("start: S\nS -> eps\n")
    with pytest.raises(ValueError):
        parse_grammar("alphabet: a b\nS -> eps\n")


def test_parse_rejects_unknown_symbols():
    # parse-layer errors surface as the file-format error type
    with pytest.raises(FormatError):
        parse_grammar("alphabet: a\nstart: S\nS -> a T\n")


def test_empty_alternative_line_declares_nonterminal():
    g = parse_grammar("alphabet: a\nstart: S\nS -> a S | eps\nT ->\n")
    assert g.productions["T"] == []


def test_nullable_set():
    assert nullable_set(dyck_grammar()) == {"S"}
    g = parse_grammar("alphabet: a\nstart: S\nS -> a S\n")
    assert nullable_set(g) == set()


def test_epsilon_tree_counts_finite():
    # S has two trees for eps: the direct production and via T T
    g = parse_grammar("alphabet: a\nstart: S\nS -> T T | eps\nT -> eps\n")
    counts = epsilon_tree_counts(g)
    assert counts["S"] == 2
    assert counts["T"] == 1


def test_epsilon_tree_counts_infinite():
    g = parse_grammar("alphabet: a\nstart: S\nS -> S | eps\n")
    assert epsilon_tree_counts(g)["S"] is None
    with pytest.raises(InfiniteDerivationsError):
        count_derivations(g, ())


def test_trim_drops_useless_nonterminals():
    g = parse_grammar(
        "alphabet: a b\nstart: S\n"
        "S -> a S b S | eps\n"
        "U -> a U\n"       # unproductive
        "W -> a S\n"       # unreachable
    )
    t, dropped = trim(g)
    assert set(t.productions) == {"S"}
    assert "U" in dropped["unproductive"]
    assert "W" in dropped["unreachable"]
    # the trimmed grammar derives the same words
    assert language_words(t, 6) == language_words(g, 6)


def test_is_language_empty():
    assert is_language_empty(parse_grammar("alphabet: a\nstart: S\nS -> a S\n"))
    assert not is_language_empty(dyck_grammar())


def test_derives_matches_hand_rolled_predicate():
    g = dyck_grammar()
    for length in range(9):
        for code in range(2**length):
            w = decode_word(length, code, 2)
            assert derives(g, w) == is_dyck_word(w)


def test_bounded_language_matches_membership():
    g = dyck_grammar()
    rows = bounded_language(g, 8)[g.start]
    for length in range(9):
        expect = {
            encode_word(w, 2)[1]
            for w in (decode_word(length, c, 2) for c in range(2**length))
            if is_dyck_word(w)
        }
        assert rows[length] == expect


def test_count_derivations_binary_trees():
    # S -> S S | a over one letter: trees with k leaves = Catalan(k-1),
    # checked against the closed form computed here by direct recursion
    g = parse_grammar("alphabet: a\nstart: S\nS -> S S | a\n")
    catalan = [1, 1, 2, 5, 14, 42, 132]
    for k in range(1, 7):
        assert count_derivations(g, (0,) * k) == catalan[k - 1]


def test_derivation_totals_sum_counts():
    g = parse_grammar("alphabet: a\nstart: S\nS -> S S | a\n")
    totals = derivation_totals(g, 6)[g.start]
    assert totals == [0, 1, 1, 2, 5, 14, 42]


def test_unambiguity_check_passes_and_fails():
    assert check_unambiguous_bounded(dyck_grammar(), 10).ok
    assert dyck_grammar().unambiguity_status == "unknown"  # fresh copies

    g = parse_grammar("alphabet: a\nstart: S\nS -> S S | a\n")
    rep = check_unambiguous_bounded(g, 6)
    assert not rep.ok
    assert rep.witness == (0, 0, 0)
    assert rep.witness_count == 2


def test_unambiguity_check_sets_status():
    g = universal_grammar()
    assert check_unambiguous_bounded(g, 8).ok
    assert g.unambiguity_status == "bounded-verified(8)"


def test_language_words_sorted_and_complete():
    words = language_words(universal_grammar(), 3)
    for length in range(4):
        assert words[length] == [
            decode_word(length, c, 2) for c in range(2**length)
        ]


def test_counts_on_random_grammars_follow_membership():
    # derivation totals can never undercount the member words
    rng = random.Random(20260818)
    from fixtures_families import random_short_gnf

    for _ in range(25):
        g = random_short_gnf(rng)
        rows = bounded_language(g, 6)[g.start]
        totals = derivation_totals(g, 6)[g.start]
        for n in range(7):
            assert totals[n] >= len(rows[n])
