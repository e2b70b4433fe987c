"""Coin-flip measures: exact regular, certified context-free, Monte Carlo."""

import random
from fractions import Fraction

import pytest

from fixtures_families import (
    a_star_dfa,
    brute_words,
    dyck_grammar,
    empty_language_dfa,
    even_length_dfa,
    random_dfa,
    sigma_star_dfa,
)
from unamb.automata import concat_automata, check_unambiguous_nfa, parse_automaton
from unamb.gnf import to_short_gnf
from unamb.grammar import check_unambiguous_bounded, parse_grammar
from unamb.measure import (
    WILSON_Z_99,
    ComparisonQuery,
    Measure,
    MeasureError,
    compare_measure,
    monte_carlo_measure,
    regular_measure_exact,
    trivial_epsilon_decision,
    ucfg_measure,
    word_measure,
)

F = Fraction


def verified_dyck():
    g = to_short_gnf(dyck_grammar())
    check_unambiguous_bounded(g, 8)
    return g


def test_word_measure():
    assert word_measure((), 2) == F(1, 3)
    assert word_measure((0,), 2) == F(1, 9)
    assert word_measure((0, 1, 0), 3) == F(1, 4**4)
    with pytest.raises(MeasureError):
        word_measure((), 0)


def test_measure_bounds_guard():
    with pytest.raises(MeasureError):
        Measure.exact(F(3, 2))
    est = monte_carlo_measure(sigma_star_dfa(), 10, 1)
    with pytest.raises(MeasureError):
        est.bounds()


def test_regular_closed_forms():
    # sum over a^k of (1/3)^(k+1) = 1/2; even lengths give 3/5
    assert regular_measure_exact(sigma_star_dfa()) == 1
    assert regular_measure_exact(empty_language_dfa()) == 0
    assert regular_measure_exact(a_star_dfa()) == F(1, 2)
    assert regular_measure_exact(even_length_dfa()) == F(3, 5)


def test_regular_rejects_ambiguous():
    # two initial states both accepting the same words
    a = parse_automaton(
        "alphabet: a\nstates: p q\ninitial: p q\naccepting: p q\n"
        "p a p\nq a q\n"
    )
    with pytest.raises(MeasureError):
        regular_measure_exact(a)


def test_regular_measure_sandwiched_by_truncations():
    # brute prefix sum <= mu <= prefix sum + tail mass of lengths > 8
    tail = F(2, 3) ** 9
    rng = random.Random(31)
    for _ in range(25):
        a = random_dfa(rng, 4)
        mu = regular_measure_exact(a)
        partial = sum((word_measure(w, 2) for w in brute_words(a, 8)), F(0))
        assert partial <= mu <= partial + tail


def test_product_law_on_unambiguous_concatenations():
    rng = random.Random(20)
    checked = 0
    while checked < 15:
        a, b = random_dfa(rng, 3), random_dfa(rng, 3)
        c = concat_automata(a, b)
        if not check_unambiguous_nfa(c)[0]:
            continue
        assert regular_measure_exact(c) == 3 * regular_measure_exact(
            a
        ) * regular_measure_exact(b)
        checked += 1


def test_dyck_interval():
    # mu = (3 - sqrt(5))/2; for v < 3/2, v <= mu iff (3-2v)^2 >= 5
    m = ucfg_measure(verified_dyck(), F(1, 1 << 30))
    lo, hi = m.bounds()
    assert hi - lo <= F(1, 10**6)
    assert (3 - 2 * lo) ** 2 >= 5 >= (3 - 2 * hi) ** 2


def test_ucfg_measure_refuses_unknown_status():
    g = to_short_gnf(dyck_grammar())  # conversion of a status-less grammar
    assert g.unambiguity_status == "unknown"
    with pytest.raises(MeasureError):
        ucfg_measure(g)


def test_ucfg_measure_requires_short_gnf():
    g = dyck_grammar()
    check_unambiguous_bounded(g, 6)
    with pytest.raises(MeasureError):
        ucfg_measure(g)


def test_query_validation():
    with pytest.raises(MeasureError):
        ComparisonQuery(a_star_dfa(), F(1, 2), "==")
    with pytest.raises(MeasureError):
        ComparisonQuery(a_star_dfa(), F(3, 2), "<=")


def test_trivial_epsilon_decisions():
    assert trivial_epsilon_decision("<=", F(3, 2)).decision == "holds"
    assert trivial_epsilon_decision(">", F(3, 2)).decision == "fails"
    assert trivial_epsilon_decision(">=", F(-1, 2)).decision == "holds"
    assert trivial_epsilon_decision("<", F(-1, 2)).decision == "fails"
    assert trivial_epsilon_decision("<=", F(1, 2)) is None
    assert trivial_epsilon_decision(">=", F(0)) is None


def test_compare_regular_exact():
    q = ComparisonQuery(a_star_dfa(), F(1, 2), "<=")
    r = compare_measure(q)
    assert (r.decision, r.exact) == ("holds", F(1, 2))
    assert compare_measure(ComparisonQuery(a_star_dfa(), F(1, 2), "<")).decision == "fails"
    assert compare_measure(ComparisonQuery(a_star_dfa(), F(1, 3), ">")).decision == "holds"


def test_compare_regular_boundary_witnesses():
    # non-universal language vs eps = 1: a shortest rejected word is attached
    r = compare_measure(ComparisonQuery(even_length_dfa(), F(1), "<"))
    assert r.decision == "holds"
    assert r.witness == (0,)
    # nonempty language vs eps = 0
    r = compare_measure(ComparisonQuery(a_star_dfa(), F(0), ">"))
    assert r.decision == "holds"
    assert r.witness == ()


def test_compare_grammar_interval():
    d = verified_dyck()
    assert compare_measure(ComparisonQuery(d, F(2, 5), "<")).decision == "holds"
    assert compare_measure(ComparisonQuery(d, F(19, 50), ">")).decision == "holds"
    assert compare_measure(ComparisonQuery(d, F(2, 5), ">=")).decision == "fails"


def test_compare_grammar_boundary_witnesses():
    d = verified_dyck()
    r = compare_measure(ComparisonQuery(d, F(1), "<="))
    assert r.decision == "holds"
    assert r.witness == (0,)  # no length-1 word is balanced
    r = compare_measure(ComparisonQuery(d, F(1), ">"))
    assert r.decision == "fails"
    r = compare_measure(ComparisonQuery(d, F(0), ">="))
    assert r.decision == "holds"
    assert r.witness == ()


def test_compare_empty_grammar_exact_zero():
    g = parse_grammar("alphabet: a b\nstart: S\nS -> a S S\n")
    check_unambiguous_bounded(g, 6)
    r = compare_measure(ComparisonQuery(g, F(0), "<="))
    assert (r.decision, r.exact) == ("holds", F(0))
    assert compare_measure(ComparisonQuery(g, F(0), ">")).decision == "fails"


def test_compare_undecided_when_threshold_inside_interval():
    d = verified_dyck()
    tol = F(1, 1 << 30)
    lo, hi = ucfg_measure(d, tol).bounds()
    eps = (lo + hi) / 2
    r = compare_measure(ComparisonQuery(d, eps, "<="), tol=tol)
    assert r.decision == "undecided"
    assert r.interval is not None


def test_monte_carlo_deterministic_and_consistent():
    for target in (a_star_dfa(), even_length_dfa()):
        exact = regular_measure_exact(target)
        m1 = monte_carlo_measure(target, 4000, seed=99)
        m2 = monte_carlo_measure(target, 4000, seed=99)
        assert (m1.mean, m1.half_width) == (m2.mean, m2.half_width)
        sigma = m1.half_width / WILSON_Z_99
        assert abs(m1.mean - float(exact)) <= 3 * sigma + 1e-12


def test_monte_carlo_on_grammar_target():
    m = monte_carlo_measure(verified_dyck(), 2000, seed=5)
    assert abs(m.mean - 0.381966) <= 3 * (m.half_width / WILSON_Z_99) + 1e-12


def test_monte_carlo_needs_samples():
    with pytest.raises(MeasureError):
        monte_carlo_measure(a_star_dfa(), 0, seed=1)
