"""Layered universality decisions on grammars."""

import stat
from fractions import Fraction

import pytest

from fixtures_families import (
    below_power_grammar,
    dyck_grammar,
    single_word_grammar,
    universal_grammar,
)
from unamb.gnf import to_short_gnf
from unamb.grammar import check_unambiguous_bounded, parse_grammar
from unamb.measure import ucfg_measure
from unamb.universality import AmbiguityDiagnostic, decide_universality_grammar

F = Fraction


def test_universal_grammar_is_bounded_universal():
    r = decide_universality_grammar(universal_grammar(), bound=32)
    assert r.verdict == "UNIVERSAL-BOUNDED"
    assert r.bound == 32
    assert r.witness is None
    assert any("deficit scan" in s for s in r.stages)
    assert any("inconclusive" in s for s in r.stages)
    assert r.describe(universal_grammar().alphabet) == "UNIVERSAL-BOUNDED(32)"


def test_balanced_words_not_universal_with_shortest_witness():
    g = dyck_grammar()
    r = decide_universality_grammar(g, bound=32)
    assert r.verdict == "NOT-UNIVERSAL"
    assert r.witness_length == 1
    assert r.witness == (0,)
    assert "witness: a" in r.describe(g.alphabet)


def test_single_word_grammar_misses_the_empty_word():
    r = decide_universality_grammar(single_word_grammar(2))
    assert (r.verdict, r.witness_length, r.witness) == ("NOT-UNIVERSAL", 0, ())


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_doubling_family_shortest_witness_is_power_of_two(n):
    r = decide_universality_grammar(below_power_grammar(n), bound=32)
    assert r.verdict == "NOT-UNIVERSAL"
    assert r.witness_length == 2**n
    assert r.witness == (0,) * 2**n


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_doubling_family_measures(n):
    # mu of {a^0..a^(2^n - 1)} is the geometric sum 1 - 2^(-2^n);
    # mu of {a^(2^n)} is exactly 2^(-(2^n)-1)
    y = to_short_gnf(below_power_grammar(n))
    check_unambiguous_bounded(y, 8)
    lo, hi = ucfg_measure(y, F(1, 1 << 40)).bounds()
    want = 1 - F(1, 2 ** (2**n))
    assert abs(lo - want) <= F(1, 10**9) and abs(hi - want) <= F(1, 10**9)

    x = to_short_gnf(single_word_grammar(n))
    check_unambiguous_bounded(x, 8)
    m = ucfg_measure(x, F(1, 1 << 40))
    assert m.kind == "exact"
    assert m.value == F(1, 2 ** (2**n + 1))


def test_ambiguous_grammar_aborts_with_diagnostic():
    # 'a' derives two trees over a one-letter alphabet: counts exceed words
    g = parse_grammar(
        "alphabet: a\nstart: S\nS -> a S S | a T S | eps\nT -> eps\n"
    )
    assert g.is_short_gnf
    with pytest.raises(AmbiguityDiagnostic) as exc:
        decide_universality_grammar(g, bound=8)
    assert exc.value.length == 1
    assert exc.value.excess == 1


def test_ambiguity_surviving_conversion_still_aborts():
    g = parse_grammar("alphabet: a\nstart: S\nS -> a S | a S S | eps\n")
    with pytest.raises(AmbiguityDiagnostic):
        decide_universality_grammar(g, bound=8)


def test_measure_stage_refutes_beyond_the_scan_bound():
    # shortest missing word has length 32, past the scan bound of 16;
    # the certified measure upper bound still proves non-universality,
    # and the follow-up scan recovers the concrete witness
    r = decide_universality_grammar(below_power_grammar(5), bound=16)
    assert r.verdict == "NOT-UNIVERSAL"
    assert r.witness_length == 32
    assert r.witness == (0,) * 32
    assert "measure_upper" in r.certificate
    assert any("measure stage: certified" in s for s in r.stages)


def test_smt_stage_certifies_universality(tmp_path):
    exe = tmp_path / "always-unsat"
    exe.write_text("#!/bin/sh\necho unsat\n")
    exe.chmod(exe.stat().st_mode | stat.S_IXUSR)
    r = decide_universality_grammar(universal_grammar(), bound=16, smt_backend=str(exe))
    assert r.verdict == "UNIVERSAL-CERTIFIED"
    assert r.certificate == {"backend": str(exe)}
    assert any("smt stage" in s for s in r.stages)


def test_smt_unknown_keeps_bounded_verdict(tmp_path):
    exe = tmp_path / "always-unknown"
    exe.write_text("#!/bin/sh\necho unknown\n")
    exe.chmod(exe.stat().st_mode | stat.S_IXUSR)
    r = decide_universality_grammar(universal_grammar(), bound=16, smt_backend=str(exe))
    assert r.verdict == "UNIVERSAL-BOUNDED"


def test_negative_bound_rejected():
    with pytest.raises(ValueError):
        decide_universality_grammar(universal_grammar(), bound=-1)


def test_zero_bound_still_sound():
    r = decide_universality_grammar(universal_grammar(), bound=0)
    assert r.verdict == "UNIVERSAL-BOUNDED"
    assert r.bound == 0
