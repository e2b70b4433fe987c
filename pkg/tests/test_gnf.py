"""Short Greibach normal form conversion."""

import random

import pytest

from fixtures_families import (
    below_power_grammar,
    dyck_grammar,
    random_short_gnf,
    single_word_grammar,
    universal_grammar,
)
from unamb.gnf import to_short_gnf
from unamb.grammar import (
    bounded_language,
    check_unambiguous_bounded,
    derivation_totals,
    parse_grammar,
)


def assert_same_language(g, h, max_len=8):
    assert bounded_language(g, max_len)[g.start] == bounded_language(h, max_len)[h.start]


def assert_same_counts(g, h, max_len=8):
    assert (
        derivation_totals(g, max_len)[g.start]
        == derivation_totals(h, max_len)[h.start]
    )


@pytest.mark.parametrize(
    "build",
    [dyck_grammar, universal_grammar, lambda: single_word_grammar(2), lambda: below_power_grammar(2)],
)
def test_conversion_preserves_language_and_counts(build):
    g = build()
    h = to_short_gnf(g)
    assert h.is_short_gnf
    assert_same_language(g, h)
    # tree counts survive, so unambiguity is preserved, not just language
    assert_same_counts(g, h)


def test_conversion_is_identity_safe_on_short_gnf_input():
    g = to_short_gnf(dyck_grammar())
    again = to_short_gnf(g)
    assert again.is_short_gnf
    assert_same_language(g, again)


def test_long_bodies_and_terminal_tails():
    g = parse_grammar(
        "alphabet: a b c\nstart: S\nS -> a b S c | b\nT -> a\n"
    )
    h = to_short_gnf(g)
    assert h.is_short_gnf
    assert_same_language(g, h, 7)
    assert_same_counts(g, h, 7)


def test_nullable_inner_symbols():
    g = parse_grammar(
        "alphabet: a b\nstart: S\nS -> A a A\nA -> b | eps\n"
    )
    h = to_short_gnf(g)
    assert h.is_short_gnf
    assert_same_language(g, h, 6)
    assert_same_counts(g, h, 6)


def test_unit_cycle_is_rejected():
    g = parse_grammar("alphabet: a\nstart: S\nS -> T | a\nT -> S\n")
    with pytest.raises(ValueError):
        to_short_gnf(g)


def test_random_grammars_round_trip():
    rng = random.Random(7)
    for _ in range(30):
        g = random_short_gnf(rng)
        h = to_short_gnf(g)
        assert h.is_short_gnf
        assert_same_language(g, h, 7)
        assert_same_counts(g, h, 7)


def test_status_carried_as_claim():
    # a verified bound applies to the source grammar only, so the converted
    # grammar records the weaker "claimed"
    g = universal_grammar()
    check_unambiguous_bounded(g, 8)
    assert to_short_gnf(g).unambiguity_status == "claimed"
    assert to_short_gnf(dyck_grammar()).unambiguity_status == "unknown"
