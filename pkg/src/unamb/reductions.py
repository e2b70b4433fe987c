"""Inclusion-to-universality machinery.

Two generic constructions drive everything here.  Determinising the
left-hand side re-labels its transitions with unique ids, giving a DFA
over the id alphabet together with the projection h back to the original
letters; lifting the right-hand side over h preserves determinism and
unambiguity.  Then, for a deterministic lhs,

    (rhs restricted to L(lhs))  |_|  complement(L(lhs))

is universal exactly when L(lhs) is included in L(rhs), and the two
parts have disjoint languages so unambiguity survives the union.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .automata import (
    Automaton,
    AutomatonError,
    check_unambiguous_nfa,
    count_accepting_paths,
    dfa_complement,
    disjoint_union_automata,
    fresh_name,
    product_automaton,
    automaton_to_right_linear,
    shortest_rejected_word,
    single_initial,
    subset_oracle_inclusion,
    totalize,
    trim_automaton,
)
from .alphabet import Alphabet
from .gnf import to_short_gnf
from .grammar import (
    Grammar,
    derivation_totals,
    is_language_empty,
    language_words,
    trim,
)


class ReductionError(ValueError):
    pass


def _check_rhs_status(g: Grammar) -> None:
    status = g.unambiguity_status
    if not (status == "claimed" or status.startswith("bounded-verified")):
        raise ReductionError(
            f"grammar unambiguity status is {status!r}; the reduction "
            "contract needs a claimed or bounded-verified grammar"
        )


# ---------------------------------------------------------------------------
# determinisation by transition labeling


@dataclass(frozen=True)
class LabeledMachine:
    """A DFA over the transition-id alphabet of a source automaton,
    with the projection h: id -> original letter."""

    automaton: Automaton
    sigma: Alphabet
    h: dict[str, str]

    def project_word(self, word: tuple[int, ...]) -> tuple[int, ...]:
        """Map a word over the lifted alphabet back through h."""
        lifted = self.automaton.alphabet
        return tuple(self.sigma.index(self.h[lifted.name(i)]) for i in word)


def determinise_lhs(a: Automaton) -> LabeledMachine:
    """Re-label every transition of the (totalised) input with a unique
    id letter `p:a:q#k`.  Each id letter is used by exactly one
    transition, so the result is deterministic, and projecting its
    language through h gives back L(a)."""
    m = single_initial(a)
    m = totalize(m)
    ids = []
    h: dict[str, str] = {}
    lifted_trans = []
    for k, (p, la, q) in enumerate(m.transitions):
        letter = m.alphabet.name(la)
        ident = f"{p}:{letter}:{q}#{k}"
        ids.append(ident)
        h[ident] = letter
        lifted_trans.append((p, k, q))
    lifted = Automaton(
        Alphabet(tuple(ids)),
        m.states,
        m.initial,
        m.accepting,
        tuple(lifted_trans),
        "DFA",
    )
    return LabeledMachine(lifted, a.alphabet, h)


def lift_rhs(b: Automaton | Grammar, lm: LabeledMachine) -> Automaton | Grammar:
    """Inverse homomorphic image: L(result) = h^{-1}(L(b)) over the
    lifted alphabet.  Replacing each letter by the choice of its
    preimage ids maps runs (derivations) one-to-one, so determinism and
    unambiguity carry over."""
    if b.alphabet != lm.sigma:
        raise ReductionError(
            f"right-hand side alphabet {b.alphabet.letters} does not match "
            f"the homomorphism codomain {lm.sigma.letters}"
        )
    lifted = lm.automaton.alphabet
    preimage: dict[int, list[int]] = {la: [] for la in range(len(lm.sigma))}
    for i, ident in enumerate(lifted.letters):
        preimage[lm.sigma.index(lm.h[ident])].append(i)

    if isinstance(b, Automaton):
        trans = [
            (p, i, q) for p, la, q in b.transitions for i in preimage[la]
        ]
        klass = b.klass if b.klass in ("DFA", "UFA") else "NFA"
        return Automaton(lifted, b.states, b.initial, b.accepting, tuple(trans), klass)

    productions: dict[str, list[tuple[str, ...]]] = {}
    if b.is_short_gnf:
        # leading-terminal expansion keeps short GNF
        for lhs, bodies in b.productions.items():
            out = []
            for body in bodies:
                if body == ():
                    out.append(())
                else:
                    a0, y, z = body
                    out.extend(
                        (lifted.name(i), y, z)
                        for i in preimage[b.alphabet.index(a0)]
                    )
            productions[lhs] = out
        status = "claimed" if b.unambiguity_status != "unknown" else "unknown"
        return Grammar(lifted, b.start, productions, unambiguity_status=status)

    # general grammars: wrap each terminal occurrence in a fresh
    # nonterminal expanding to the preimage ids
    taken = set(b.productions) | set(lifted.letters)
    wrappers: dict[str, str] = {}
    for letter in b.alphabet.letters:
        w = fresh_name(f"H_{letter}", taken)
        wrappers[letter] = w
        taken.add(w)
    for lhs, bodies in b.productions.items():
        productions[lhs] = [
            tuple(wrappers[s] if b.is_terminal(s) else s for s in body)
            for body in bodies
        ]
    for letter, w in wrappers.items():
        productions[w] = [
            (lifted.name(i),) for i in preimage[b.alphabet.index(letter)]
        ]
    status = "claimed" if b.unambiguity_status != "unknown" else "unknown"
    return Grammar(lifted, b.start, productions, unambiguity_status=status)


# ---------------------------------------------------------------------------
# inclusion -> universality (Eq. 4 shape)


@dataclass(frozen=True)
class UniversalityInstance:
    target: Grammar | Automaton
    provenance: dict = field(default_factory=dict)


def inclusion_to_universality(
    lhs: Automaton, rhs: Automaton | Grammar
) -> UniversalityInstance:
    """Build (rhs intersect L(lhs)) |_| complement(lhs); the target is
    universal iff L(lhs) is a subset of L(rhs).  lhs must be
    deterministic; it is totalised here if needed."""
    if not lhs.is_deterministic:
        raise ReductionError("left-hand side must be deterministic")
    lhs_total = totalize(lhs)
    complement = dfa_complement(lhs_total)
    if isinstance(rhs, Automaton):
        part = product_automaton(rhs, lhs_total)
        target: Grammar | Automaton = disjoint_union_automata(part, complement)
        prov_rhs = "automaton"
    else:
        _check_rhs_status(rhs)
        g = rhs if rhs.is_short_gnf else to_short_gnf(rhs)
        part_g = product_ucfg_dfa(g, lhs_total)
        target = disjoint_union(part_g, complement)
        prov_rhs = "grammar"
    return UniversalityInstance(
        target,
        {
            "construction": "inclusion_to_universality",
            "lhs_states": len(lhs.states),
            "rhs_kind": prov_rhs,
        },
    )


def product_ucfg_dfa(g: Grammar, a: Automaton) -> Grammar:
    """Intersection grammar over state-pair-decorated nonterminals.

    [p X q] derives exactly the words X derives that drive the DFA from
    p to q; a body X <- a Y Z splits as a step on a followed by an
    intermediate state choice.  The DFA run of each word is unique, so
    derivation trees survive one-to-one and unambiguity is preserved."""
    if not g.is_short_gnf:
        raise ReductionError("intersection requires a short-GNF grammar")
    if not (a.is_deterministic and a.is_total and a.initial):
        raise ReductionError("intersection requires a total DFA")
    if g.alphabet != a.alphabet:
        raise ReductionError("grammar and DFA alphabets differ")
    step: dict[tuple[str, int], str] = {
        (p, la): q for p, la, q in a.transitions
    }
    states = a.states
    taken = set(g.alphabet.letters)
    names: dict[tuple[str, str, str], str] = {}
    for p in states:
        for x in g.productions:
            for q in states:
                nm = fresh_name(f"{p}~{x}~{q}", taken)
                names[(p, x, q)] = nm
                taken.add(nm)
    productions: dict[str, list[tuple[str, ...]]] = {nm: [] for nm in names.values()}
    for x, bodies in g.productions.items():
        for body in bodies:
            if body == ():
                for p in states:
                    productions[names[(p, x, p)]].append(())
            else:
                a0, y, z = body
                la = g.alphabet.index(a0)
                for p in states:
                    p1 = step[(p, la)]
                    for r in states:
                        for q in states:
                            productions[names[(p, x, q)]].append(
                                (a0, names[(p1, y, r)], names[(r, z, q)])
                            )
    q0 = a.initial[0]
    start = fresh_name("S~0", taken)
    start_bodies: list[tuple[str, ...]] = []
    for f in a.accepting:
        start_bodies.extend(productions[names[(q0, g.start, f)]])
    productions[start] = start_bodies
    status = "claimed" if g.unambiguity_status != "unknown" else "unknown"
    out = Grammar(g.alphabet, start, productions, unambiguity_status=status)
    trimmed, _ = trim(out)
    return trimmed


def _overlap_witness(g: Grammar, max_len: int = 12) -> tuple[int, ...] | None:
    totals = derivation_totals(g, max_len)[g.start]
    for n, c in enumerate(totals):
        if c is None or c > 0:
            words = language_words(g, n)
            if words[n]:
                return words[n][0]
    return None


def disjoint_union(g: Grammar, a: Automaton) -> Grammar:
    """Union grammar for L(g) |_| L(a), for disjoint languages.

    Disjointness is decided exactly (the product grammar's emptiness is
    decidable), not just spot-checked; an overlap is reported with a
    shortest witness when one exists within length 12.  The DFA side is
    converted to an unambiguous right-linear grammar and merged under a
    fresh start, so the union is unambiguous whenever g is."""
    if not g.is_short_gnf:
        raise ReductionError("union requires a short-GNF grammar")
    if a.klass != "DFA" or not a.is_deterministic:
        raise ReductionError("union requires a DFA")
    if g.alphabet != a.alphabet:
        raise ReductionError("grammar and DFA alphabets differ")
    if a.initial:
        overlap = product_ucfg_dfa(g, totalize(a))
        if not is_language_empty(overlap):
            w = _overlap_witness(overlap)
            shown = g.alphabet.format_word(w) if w is not None else "(length > 12)"
            raise ReductionError(
                f"precondition violation: languages overlap, e.g. on {shown}"
            )
    rl = automaton_to_right_linear(a)
    taken = set(g.productions) | set(g.alphabet.letters)
    rename: dict[str, str] = {}
    for x in rl.productions:
        nm = fresh_name(x, taken)
        rename[x] = nm
        taken.add(nm)
    productions: dict[str, list[tuple[str, ...]]] = {
        x: list(bodies) for x, bodies in g.productions.items()
    }
    for x, bodies in rl.productions.items():
        productions[rename[x]] = [
            tuple(s if rl.is_terminal(s) else rename[s] for s in body)
            for body in bodies
        ]
    start = fresh_name("U", taken)
    productions[start] = list(productions[g.start]) + list(productions[rename[rl.start]])
    status = "claimed" if g.unambiguity_status != "unknown" else "unknown"
    return Grammar(g.alphabet, start, productions, unambiguity_status=status)


# ---------------------------------------------------------------------------
# end-to-end deciders


@dataclass(frozen=True)
class UfaVerdict:
    kind: str  # universal | not_universal | not_unambiguous
    witness: tuple[int, ...] | None = None
    certificate: tuple[int, int, int] | None = None  # (n, path count, |Sigma|^n)


def decide_ufa_universal(a: Automaton, max_subset_states: int = 1 << 20) -> UfaVerdict:
    """Exact universality for unambiguous automata.

    Once unambiguity is verified, accepting-path counts equal word
    counts, and the deficit |Sigma|^n - f(n) obeys a linear recurrence of
    order at most s+1 (s states), so agreement up to n = s settles every
    n.  A disagreement yields a witness by subset-construction BFS; if
    that search exceeds its budget, the counting certificate is returned
    instead."""
    ok, w = check_unambiguous_nfa(a)
    if not ok:
        return UfaVerdict("not_unambiguous", witness=w)
    s = len(a.states)
    counts = count_accepting_paths(a, s)
    size = len(a.alphabet)
    for n, f in enumerate(counts):
        full = size**n
        if f > full:
            raise ReductionError(
                f"internal: {f} accepting paths exceed {full} words at length {n} "
                "after an unambiguity check"
            )
        if f < full:
            try:
                witness = shortest_rejected_word(a, n, max_subset_states)
            except AutomatonError:
                witness = None
            if witness is not None:
                return UfaVerdict("not_universal", witness=witness)
            return UfaVerdict("not_universal", certificate=(n, f, full))
    return UfaVerdict("universal")


@dataclass(frozen=True)
class InclusionResult:
    kind: str  # holds | fails | not_unambiguous
    witness: tuple[int, ...] | None = None
    certificate: tuple[int, int, int] | None = None


def decide_nfa_in_ufa(a: Automaton, b: Automaton) -> InclusionResult:
    """Exact decision of L(a) subseteq L(b) for unambiguous b, through
    lhs determinisation, rhs lifting, and UFA universality."""
    ok, w = check_unambiguous_nfa(b)
    if not ok:
        return InclusionResult("not_unambiguous", witness=w)
    if a.alphabet != b.alphabet:
        raise ReductionError("inclusion requires identical alphabets")
    lm = determinise_lhs(a)
    lifted_b = lift_rhs(b, lm)
    inst = inclusion_to_universality(lm.automaton, lifted_b)
    verdict = decide_ufa_universal(inst.target)
    if verdict.kind == "universal":
        return InclusionResult("holds")
    if verdict.kind == "not_unambiguous":
        raise ReductionError(
            "internal: the reduction target lost unambiguity "
            f"(witness {verdict.witness})"
        )
    if verdict.witness is not None:
        return InclusionResult("fails", witness=lm.project_word(verdict.witness))
    # witness search blew its budget on the lifted side: fall back to
    # the subset oracle on the original machines
    holds, witness = subset_oracle_inclusion(a, b)
    if holds:
        raise ReductionError(
            "internal: reduction and subset oracle disagree on inclusion"
        )
    return InclusionResult("fails", witness=witness, certificate=verdict.certificate)


def build_nfa_in_ucfg_instance(a: Automaton, g: Grammar) -> UniversalityInstance:
    """Universality instance over the lifted alphabet whose target is
    universal iff L(a) subseteq L(g)."""
    _check_rhs_status(g)
    if a.alphabet != g.alphabet:
        raise ReductionError("inclusion requires identical alphabets")
    base = g if g.is_short_gnf else to_short_gnf(g)
    lm = determinise_lhs(a)
    lifted_g = lift_rhs(base, lm)
    inst = inclusion_to_universality(lm.automaton, lifted_g)
    prov = dict(inst.provenance)
    prov.update(
        {
            "construction": "nfa_in_ucfg",
            "homomorphism": dict(lm.h),
            "source_automaton_states": len(a.states),
            "source_grammar_nonterminals": len(g.productions),
        }
    )
    return UniversalityInstance(inst.target, prov)