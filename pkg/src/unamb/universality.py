"""Layered universality decision for grammars.

The decision stack, cheapest first: a bounded scan of the deficit
sequence |Sigma|^n - f(n) (exact and witness-producing), a certified
measure upper bound (mu < 1 proves non-universality even without a
witness in reach), and an optional SMT certification of deficit
zeroness.  No stage ever claims "universal" outright without the SMT
certificate; the honest default is bounded evidence.

A negative deficit means the grammar derives more trees than there are
words, which refutes unambiguity; that aborts the run with a diagnostic
rather than producing a verdict, since every stage's semantics assumes
trees = words.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .alphabet import decode_word
from .convrec import (
    ZeronessConfig,
    eval_prefix,
    universality_difference,
    zeroness,
)
from .fixpoint import DivergenceError
from .gnf import to_short_gnf
from .grammar import Grammar, bounded_language
from .measure import ucfg_measure


class AmbiguityDiagnostic(ValueError):
    """Tree counts exceeded the word-count ceiling |Sigma|^n."""

    def __init__(self, length: int, excess) -> None:
        self.length = length
        self.excess = excess
        super().__init__(
            f"derivation trees exceed |Sigma|^n at length {length} "
            f"(by {excess}); the grammar is ambiguous"
        )


@dataclass(frozen=True)
class UniversalityReport:
    verdict: str  # NOT-UNIVERSAL | UNIVERSAL-BOUNDED | UNIVERSAL-CERTIFIED | UNDECIDED
    bound: int
    witness: tuple[int, ...] | None = None
    witness_length: int | None = None
    certificate: dict | None = None
    stages: tuple[str, ...] = ()

    def describe(self, alphabet) -> str:
        if self.verdict == "NOT-UNIVERSAL":
            if self.witness is not None:
                return f"NOT-UNIVERSAL (witness: {alphabet.format_word(self.witness)})"
            return f"NOT-UNIVERSAL (certificate: {self.certificate})"
        if self.verdict == "UNIVERSAL-BOUNDED":
            return f"UNIVERSAL-BOUNDED({self.bound})"
        if self.verdict == "UNIVERSAL-CERTIFIED":
            return f"UNIVERSAL-CERTIFIED ({self.certificate['backend']})"
        return "UNDECIDED"


def _missing_word_at(
    g: Grammar, length: int, budget: int
) -> tuple[int, ...] | None:
    n = len(g.alphabet)
    if n**length > budget:
        return None
    have = bounded_language(g, length)[g.start][length]
    for code in range(n**length):
        if code not in have:
            return decode_word(length, code, n)
    return None


def decide_universality_grammar(
    g: Grammar,
    bound: int = 32,
    measure_tol: Fraction = Fraction(1, 1 << 30),
    smt_backend: str | None = None,
    witness_budget: int = 1 << 22,
) -> UniversalityReport:
    """Decide whether L(g) = Sigma*, with layered evidence.

    Raises AmbiguityDiagnostic when the counts refute unambiguity."""
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    gs = g if g.is_short_gnf else to_short_gnf(g)
    stages: list[str] = []

    diff = universality_difference(gs)
    row = eval_prefix(diff, bound)[0]
    for n, v in enumerate(row):
        if v < 0:
            raise AmbiguityDiagnostic(n, -v)
        if v > 0:
            witness = _missing_word_at(gs, n, witness_budget)
            stages.append(f"deficit scan: first miss at length {n}")
            if witness is not None:
                return UniversalityReport(
                    "NOT-UNIVERSAL",
                    bound,
                    witness=witness,
                    witness_length=n,
                    certificate=None,
                    stages=tuple(stages),
                )
            size = len(gs.alphabet)
            return UniversalityReport(
                "NOT-UNIVERSAL",
                bound,
                witness_length=n,
                certificate={
                    "length": n,
                    "derivable": int(size**n - v),
                    "all_words": int(size**n),
                },
                stages=tuple(stages),
            )
    stages.append(f"deficit scan: zero through length {bound}")

    # measure stage: a certified upper bound below 1 proves non-universality.
    # Sound even if the grammar is secretly ambiguous (tree counts dominate
    # word counts, so the counting measure dominates the word measure).
    claimed = Grammar(
        gs.alphabet, gs.start, {x: list(b) for x, b in gs.productions.items()},
        unambiguity_status="claimed",
    )
    try:
        m = ucfg_measure(claimed, tol=measure_tol)
    except DivergenceError as exc:
        # unambiguous counts keep the system summable at 1/(n+1)
        raise AmbiguityDiagnostic(-1, f"generating function diverges ({exc})") from exc
    lo, hi = m.bounds()
    if hi < 1:
        gap = 1 - hi
        gtxt = f"{float(gap):.3g}" if float(gap) > 0 else "<1e-300"
        stages.append(f"measure stage: certified upper bound 1 - {gtxt}")
        wide = eval_prefix(diff, 4 * max(bound, 1))[0]
        for n, v in enumerate(wide):
            if v < 0:
                raise AmbiguityDiagnostic(n, -v)
            if v > 0:
                witness = _missing_word_at(gs, n, witness_budget)
                return UniversalityReport(
                    "NOT-UNIVERSAL",
                    bound,
                    witness=witness,
                    witness_length=n,
                    certificate={"measure_upper": str(hi)},
                    stages=tuple(stages),
                )
        return UniversalityReport(
            "NOT-UNIVERSAL",
            bound,
            certificate={"measure_upper": str(hi)},
            stages=tuple(stages),
        )
    stages.append("measure stage: upper bound reaches 1, inconclusive")

    if smt_backend is not None:
        verdict = zeroness(
            diff, ZeronessConfig(prefix_bound=bound, backend=smt_backend)
        )
        stages.append(f"smt stage: {verdict}")
        if verdict.kind == "zero_certified":
            return UniversalityReport(
                "UNIVERSAL-CERTIFIED",
                bound,
                certificate={"backend": verdict.backend},
                stages=tuple(stages),
            )
        if verdict.kind == "nonzero_at":
            witness = _missing_word_at(gs, verdict.n, witness_budget)
            return UniversalityReport(
                "NOT-UNIVERSAL",
                bound,
                witness=witness,
                witness_length=verdict.n,
                certificate={"length": verdict.n},
                stages=tuple(stages),
            )

    return UniversalityReport(
        "UNIVERSAL-BOUNDED", bound, stages=tuple(stages)
    )