"""Inclusion-to-universality reductions and their end-to-end deciders."""

import random

import pytest

from fixtures_families import (
    a_star_dfa,
    brute_words,
    dyck_grammar,
    empty_language_dfa,
    even_length_dfa,
    random_nfa,
    random_ufa,
    sigma_star_dfa,
)
from unamb.automata import (
    check_unambiguous_nfa,
    parse_automaton,
    subset_oracle_inclusion,
    totalize,
)
from unamb.gnf import to_short_gnf
from unamb.grammar import check_unambiguous_bounded, language_words
from unamb.reductions import (
    ReductionError,
    build_nfa_in_ucfg_instance,
    decide_nfa_in_ufa,
    decide_ufa_universal,
    determinise_lhs,
    disjoint_union,
    inclusion_to_universality,
    lift_rhs,
    product_ucfg_dfa,
)


def verified_dyck():
    g = to_short_gnf(dyck_grammar())
    check_unambiguous_bounded(g, 8)
    return g


def odd_length_dfa():
    return parse_automaton(
        "alphabet: a b\nstates: e o\ninitial: e\naccepting: o\n"
        "e a o\ne b o\no a e\no b e\n"
    )


# -- determinisation by transition labeling ---------------------------------


def test_determinise_lhs_is_deterministic_with_unique_labels():
    lm = determinise_lhs(random_nfa(random.Random(2), 4))
    assert lm.automaton.is_deterministic
    used = [la for _, la, _ in lm.automaton.transitions]
    assert len(used) == len(set(used)) == len(lm.automaton.alphabet)


def test_determinise_lhs_projects_back_to_the_same_language():
    rng = random.Random(5)
    for _ in range(10):
        a = random_nfa(rng, 3)
        lm = determinise_lhs(a)
        projected = {lm.project_word(w) for w in brute_words(lm.automaton, 4)}
        assert projected == brute_words(a, 4)


def test_lift_rhs_automaton_is_inverse_image():
    rng = random.Random(6)
    a, b = random_nfa(rng, 3), random_ufa(rng, 3)
    lm = determinise_lhs(a)
    lifted = lift_rhs(b, lm)
    assert lifted.alphabet == lm.automaton.alphabet
    for w in brute_words(lm.automaton, 3):
        assert lifted.accepts(w) == b.accepts(lm.project_word(w))


def test_lift_rhs_preserves_determinism_class():
    lm = determinise_lhs(a_star_dfa())
    assert lift_rhs(even_length_dfa(), lm).klass == "DFA"


def test_lift_rhs_short_gnf_grammar():
    from unamb.grammar import derives

    g = verified_dyck()
    lm = determinise_lhs(sigma_star_dfa())
    lifted = lift_rhs(g, lm)
    assert lifted.is_short_gnf
    assert lifted.unambiguity_status == "claimed"
    for w in brute_words(lm.automaton, 4):
        assert derives(lifted, w) == derives(g, lm.project_word(w))


def test_lift_rhs_alphabet_mismatch():
    lm = determinise_lhs(a_star_dfa())
    one_letter = parse_automaton(
        "alphabet: a\nstates: p\ninitial: p\naccepting: p\np a p\n"
    )
    with pytest.raises(ReductionError):
        lift_rhs(one_letter, lm)


# -- the universality target --------------------------------------------------


def test_inclusion_to_universality_regular_cases():
    # a* subseteq Sigma* holds, Sigma* subseteq a* fails on any word with b
    inst = inclusion_to_universality(a_star_dfa(), sigma_star_dfa())
    assert decide_ufa_universal(inst.target).kind == "universal"
    inst = inclusion_to_universality(sigma_star_dfa(), a_star_dfa())
    v = decide_ufa_universal(inst.target)
    assert v.kind == "not_universal"


def test_inclusion_to_universality_needs_deterministic_lhs():
    two_path = parse_automaton(
        "alphabet: a b\nstates: p q r\ninitial: p\naccepting: q r\n"
        "p a q\np a r\n"
    )
    with pytest.raises(ReductionError):
        inclusion_to_universality(two_path, sigma_star_dfa())


def test_product_grammar_is_intersection():
    g = verified_dyck()
    # balanced words all have even length, so intersecting changes nothing
    p = product_ucfg_dfa(g, totalize(even_length_dfa()))
    for n, words in enumerate(language_words(p, 6)):
        assert words == language_words(g, 6)[n]
    # and intersecting with a* keeps only the empty word
    q = product_ucfg_dfa(g, totalize(a_star_dfa()))
    flat = [w for row in language_words(q, 6) for w in row]
    assert flat == [()]


def test_disjoint_union_requires_disjointness():
    g = verified_dyck()
    with pytest.raises(ReductionError) as exc:
        disjoint_union(g, even_length_dfa())  # eps is in both
    assert "overlap" in str(exc.value)


def test_disjoint_union_language_and_counts():
    from unamb.grammar import derivation_totals

    g = verified_dyck()
    u = disjoint_union(g, odd_length_dfa())
    assert u.unambiguity_status == "claimed"
    want = [
        sorted(set(language_words(g, 6)[n]) | {w for w in brute_words(odd_length_dfa(), 6) if len(w) == n})
        for n in range(7)
    ]
    got = language_words(u, 6)
    assert got == want
    # unambiguous union: trees = words
    totals = derivation_totals(u, 6)[u.start]
    assert totals == [len(row) for row in want]


# -- end-to-end deciders ------------------------------------------------------


def test_ufa_universal_verdicts():
    assert decide_ufa_universal(sigma_star_dfa()).kind == "universal"
    v = decide_ufa_universal(even_length_dfa())
    assert (v.kind, v.witness) == ("not_universal", (0,))
    ambiguous = parse_automaton(
        "alphabet: a\nstates: p q\ninitial: p q\naccepting: p q\np a p\nq a q\n"
    )
    v = decide_ufa_universal(ambiguous)
    assert v.kind == "not_unambiguous"


def test_nfa_in_ufa_matches_subset_oracle():
    rng = random.Random(40)
    agree = 0
    for _ in range(60):
        a = random_nfa(rng, 4)
        b = random_ufa(rng, 4)
        got = decide_nfa_in_ufa(a, b)
        want_holds, want_witness = subset_oracle_inclusion(a, b)
        assert got.kind == ("holds" if want_holds else "fails")
        if got.kind == "fails" and got.witness is not None:
            assert a.accepts(got.witness) and not b.accepts(got.witness)
        agree += 1
    assert agree == 60


def test_nfa_in_ufa_rejects_ambiguous_rhs():
    ambiguous = parse_automaton(
        "alphabet: a b\nstates: p q\ninitial: p q\naccepting: p q\n"
        "p a p\np b p\nq a q\nq b q\n"
    )
    r = decide_nfa_in_ufa(a_star_dfa(), ambiguous)
    assert r.kind == "not_unambiguous"
    assert r.witness is not None


def test_nfa_in_ufa_alphabet_mismatch():
    one_letter = parse_automaton(
        "alphabet: a\nstates: p\ninitial: p\naccepting: p\np a p\n"
    )
    with pytest.raises(ReductionError):
        decide_nfa_in_ufa(one_letter, sigma_star_dfa())


# -- the grammar-side instance ------------------------------------------------


def lifted_universal_on_bound(g, bound: int) -> bool:
    n = len(g.alphabet)
    rows = language_words(g, bound)
    return all(len(rows[k]) == n**k for k in range(bound + 1))


def test_nfa_in_ucfg_instance_encodes_inclusion():
    dyck = verified_dyck()
    # empty subseteq dyck holds: the target is universal (bounded check)
    inst = build_nfa_in_ucfg_instance(empty_language_dfa(), dyck)
    assert inst.provenance["construction"] == "nfa_in_ucfg"
    assert lifted_universal_on_bound(inst.target, 3)
    # a* is not included in dyck: some lifted word is missing
    inst = build_nfa_in_ucfg_instance(a_star_dfa(), dyck)
    assert not lifted_universal_on_bound(inst.target, 3)


def test_nfa_in_ucfg_homomorphism_maps_lifted_letters_back():
    dyck = verified_dyck()
    inst = build_nfa_in_ucfg_instance(a_star_dfa(), dyck)
    h = inst.provenance["homomorphism"]
    assert set(h) == set(inst.target.alphabet.letters)
    assert set(h.values()) <= {"a", "b"}


def test_nfa_in_ucfg_refuses_unknown_status():
    with pytest.raises(ReductionError):
        build_nfa_in_ucfg_instance(a_star_dfa(), to_short_gnf(dyck_grammar()))


def test_reduction_target_stays_unambiguous():
    # spot-check the headline structural claim on a regular instance
    inst = inclusion_to_universality(even_length_dfa(), a_star_dfa())
    ok, _ = check_unambiguous_nfa(inst.target)
    assert ok
