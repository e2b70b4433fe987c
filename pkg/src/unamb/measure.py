"""Coin-flip measure of languages.

Every word w over an n-letter alphabet gets weight (1/(n+1))^{|w|+1}:
the probability that a process choosing uniformly among the n letters
and a stop symbol emits exactly w.  Regular languages get exact rational
measures through a linear solve; unambiguous CFGs get certified rational
enclosures through the generating-function least fixpoint; a Monte Carlo
sampler cross-checks both.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .alphabet import decode_word
from .automata import (
    Automaton,
    check_unambiguous_nfa,
    shortest_accepted_word,
    shortest_rejected_word,
    trim_automaton,
)
from .convrec import gf_system, grammar_to_convrec
from .fixpoint import lfp_eval, solve_linear_exact
from .grammar import Grammar, bounded_language, derives, trim
from .intervals import IntervalRational

WILSON_Z_99 = 2.5758293035489004
SAMPLE_LENGTH_CAP = 10_000


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class Measure:
    kind: str  # exact | interval | estimate
    value: Fraction | None = None
    interval: IntervalRational | None = None
    mean: float | None = None
    half_width: float | None = None
    confidence: float | None = None
    samples: int | None = None
    seed: int | None = None

    @staticmethod
    def exact(value: Fraction) -> Measure:
        value = Fraction(value)
        if not 0 <= value <= 1:
            raise MeasureError(f"measure {value} outside [0,1]")
        return Measure("exact", value=value)

    @staticmethod
    def from_interval(iv: IntervalRational) -> Measure:
        if iv.lo < 0 or iv.hi > 1:
            raise MeasureError(f"measure interval {iv} outside [0,1]")
        if iv.lo == iv.hi:
            return Measure.exact(iv.lo)
        return Measure("interval", interval=iv)

    @staticmethod
    def estimate(mean: float, half_width: float, confidence: float, samples: int, seed: int) -> Measure:
        return Measure(
            "estimate",
            mean=mean,
            half_width=half_width,
            confidence=confidence,
            samples=samples,
            seed=seed,
        )

    def bounds(self) -> tuple[Fraction, Fraction]:
        if self.kind == "exact":
            return self.value, self.value
        if self.kind == "interval":
            return self.interval.lo, self.interval.hi
        raise MeasureError("estimates carry no sound bounds")


def word_measure(word: tuple[int, ...], n: int) -> Fraction:
    """mu(w) = (1/(n+1))^{|w|+1} over an n-letter alphabet."""
    if n < 1:
        raise MeasureError("alphabet must have at least one letter")
    return Fraction(1, (n + 1) ** (len(word) + 1))


# ---------------------------------------------------------------------------
# regular languages


def regular_measure_exact(a: Automaton) -> Fraction:
    """Exact measure of L(a) for an unambiguous automaton.

    On the trimmed machine every state pair is joined by at most one run
    per word, so the transition count matrix T has a convergent Neumann
    series at beta = 1/(n+1) and m = beta*(chi_accept + T m) has a unique
    solution; the measure is the sum over initial states."""
    ok, witness = check_unambiguous_nfa(a)
    if not ok:
        raise MeasureError(
            f"ambiguous automaton (two runs on {a.alphabet.format_word(witness)}); "
            "path counts do not equal word counts"
        )
    t = trim_automaton(a)
    if not t.states or not t.initial:
        return Fraction(0)
    n = len(a.alphabet)
    beta = Fraction(1, n + 1)
    order = list(t.states)
    pos = {q: i for i, q in enumerate(order)}
    k = len(order)
    succ: list[dict[int, int]] = [{} for _ in range(k)]
    for p, _, q in t.transitions:
        row = succ[pos[p]]
        j = pos[q]
        row[j] = row.get(j, 0) + 1
    rhs = [beta if q in t.accepting else Fraction(0) for q in order]
    m = _solve_states_sparse(succ, rhs, beta)
    total = sum((m[pos[q]] for q in t.initial), Fraction(0))
    if not 0 <= total <= 1:
        raise MeasureError(f"internal: measure {total} outside [0,1]")
    return total


def _solve_states_sparse(
    succ: list[dict[int, int]], rhs: list[Fraction], beta: Fraction
) -> list[Fraction]:
    """Solve m[i] = rhs[i] + beta * sum(count * m[j]) by strongly connected
    components in dependency order; only within-component blocks need a
    dense solve.  Automata from regular expressions are close to acyclic
    (cycles come from stars alone), so this is effectively linear."""
    k = len(succ)
    index = [0] * k
    low = [0] * k
    on_stack = [False] * k
    comp = [-1] * k
    stack: list[int] = []
    counter = [1]
    comps: list[list[int]] = []
    for root in range(k):
        if index[root]:
            continue
        # iterative Tarjan; components come out before their dependents
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for u in it:
                if not index[u]:
                    index[u] = low[u] = counter[0]
                    counter[0] += 1
                    stack.append(u)
                    on_stack[u] = True
                    work.append((u, iter(succ[u])))
                    advanced = True
                    break
                if on_stack[u]:
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                group = []
                while True:
                    u = stack.pop()
                    on_stack[u] = False
                    comp[u] = len(comps)
                    group.append(u)
                    if u == v:
                        break
                comps.append(group)
    m: list[Fraction | None] = [None] * k
    for group in comps:
        inside = set(group)
        const: list[Fraction] = []
        for i in group:
            c = rhs[i]
            for j, mult in succ[i].items():
                if j not in inside:
                    c += beta * mult * m[j]
            const.append(c)
        if len(group) == 1 and group[0] not in succ[group[0]]:
            m[group[0]] = const[0]
            continue
        size = len(group)
        at = {i: idx for idx, i in enumerate(group)}
        mat = [[Fraction(0)] * size for _ in range(size)]
        for idx, i in enumerate(group):
            mat[idx][idx] += 1
            for j, mult in succ[i].items():
                if j in inside:
                    mat[idx][at[j]] -= beta * mult
        sol = solve_linear_exact(mat, const)
        for idx, i in enumerate(group):
            m[i] = sol[idx]
    return m


# ---------------------------------------------------------------------------
# unambiguous context-free languages


def _require_ucfg(g: Grammar) -> None:
    if not g.is_short_gnf:
        raise MeasureError("grammar must be in short Greibach normal form")
    status = g.unambiguity_status
    if not (status == "claimed" or status.startswith("bounded-verified")):
        raise MeasureError(
            f"grammar unambiguity status is {status!r}; refuse to treat "
            "derivation counts as word counts"
        )


def ucfg_measure(g: Grammar, tol: Fraction = Fraction(1, 1 << 30)) -> Measure:
    """Certified enclosure of mu(L(g)) = beta * gf(beta), beta = 1/(n+1).

    The generating function at beta is the least fixpoint of the monotone
    counting system, evaluated with exact lower iterates and a
    Knaster-Tarski-certified upper bound.  If upper certification fails
    the honest fallback [beta*lower, 1] is returned (mu <= 1 always);
    its width exceeding tol signals the non-certification."""
    _require_ucfg(g)
    tol = Fraction(tol)
    n = len(g.alphabet)
    beta = Fraction(1, n + 1)
    s = grammar_to_convrec(g)
    r = lfp_eval(gf_system(s, beta), tol=tol * (n + 1))
    lo = max(Fraction(0), beta * r.lower[0])
    if r.upper is None:
        return Measure.from_interval(IntervalRational(min(lo, Fraction(1)), Fraction(1)))
    hi = min(Fraction(1), beta * r.upper[0])
    return Measure.from_interval(IntervalRational(min(lo, hi), hi))


# ---------------------------------------------------------------------------
# threshold comparison


_OPS = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class ComparisonQuery:
    target: Grammar | Automaton
    epsilon: Fraction
    op: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.op not in _OPS:
            raise MeasureError(f"unknown comparison operator {self.op!r}")
        if not 0 <= self.epsilon <= 1:
            raise MeasureError(f"threshold {self.epsilon} outside [0,1]")


@dataclass(frozen=True)
class CompareResult:
    decision: str  # holds | fails | undecided
    exact: Fraction | None = None
    interval: IntervalRational | None = None
    witness: tuple[int, ...] | None = None
    reason: str | None = None


def trivial_epsilon_decision(op: str, epsilon: Fraction) -> CompareResult | None:
    """Decide mu ~ epsilon from mu in [0,1] alone, for thresholds outside
    [0,1]; returns None when the language actually matters."""
    epsilon = Fraction(epsilon)
    if epsilon > 1:
        good = op in ("<=", "<")
        return CompareResult("holds" if good else "fails", reason="threshold above 1")
    if epsilon < 0:
        good = op in (">=", ">")
        return CompareResult("holds" if good else "fails", reason="threshold below 0")
    return None


def _grammar_nonmember(g: Grammar, max_len: int) -> tuple[int, ...] | None:
    n = len(g.alphabet)
    rows = bounded_language(g, max_len)[g.start]
    for length in range(max_len + 1):
        full = n ** length
        have = rows[length]
        if len(have) < full:
            code = next(c for c in range(full) if c not in have)
            return decode_word(length, code, n)
    return None


def _grammar_member(g: Grammar, max_len: int) -> tuple[int, ...] | None:
    n = len(g.alphabet)
    rows = bounded_language(g, max_len)[g.start]
    for length in range(max_len + 1):
        if rows[length]:
            return decode_word(length, min(rows[length]), n)
    return None


def _decide_interval(lo: Fraction, hi: Fraction, op: str, eps: Fraction) -> str:
    every = {"<=": hi <= eps, "<": hi < eps, ">": lo > eps, ">=": lo >= eps}[op]
    if every:
        return "holds"
    none = {"<=": lo > eps, "<": lo >= eps, ">": hi <= eps, ">=": hi < eps}[op]
    if none:
        return "fails"
    return "undecided"


def compare_measure(
    q: ComparisonQuery,
    tol: Fraction = Fraction(1, 1 << 30),
    witness_len: int = 12,
) -> CompareResult:
    """Decide mu(L) ~ epsilon.

    Regular targets are exact.  Grammar targets use the certified
    enclosure, with word searches sharpening the boundary thresholds:
    a non-member word settles comparisons against 1 (mu <= 1 - mu(w)),
    a member word settles comparisons against 0 (mu >= mu(w))."""
    eps, op = q.epsilon, q.op
    if isinstance(q.target, Automaton):
        mu = regular_measure_exact(q.target)
        decision = "holds" if _OPS[op](mu, eps) else "fails"
        witness = None
        if eps == 1 and mu < 1:
            witness = shortest_rejected_word(q.target, witness_len)
        elif eps == 0 and mu > 0:
            witness = shortest_accepted_word(q.target)
        return CompareResult(decision, exact=mu, witness=witness)

    g = q.target
    _require_ucfg(g)
    n = len(g.alphabet)

    if eps == 0:
        w = _grammar_member(g, witness_len)
        if w is not None:
            # mu >= mu(w) > 0
            decision = "holds" if op in (">", ">=") else "fails"
            return CompareResult(decision, witness=w, reason="member word gives mu > 0")
        empty = not trim(g)[0].productions.get(g.start)
        if empty:
            mu = Fraction(0)
            return CompareResult("holds" if _OPS[op](mu, eps) else "fails", exact=mu)
    if eps == 1:
        w = _grammar_nonmember(g, witness_len)
        if w is not None:
            # mu <= 1 - mu(w) < 1
            decision = "holds" if op in ("<", "<=") else "fails"
            return CompareResult(decision, witness=w, reason="non-member word gives mu < 1")

    m = ucfg_measure(g, tol)
    lo, hi = m.bounds()
    if m.kind == "exact":
        return CompareResult("holds" if _OPS[op](m.value, eps) else "fails", exact=m.value)
    decision = _decide_interval(lo, hi, op, eps)
    return CompareResult(decision, interval=IntervalRational(lo, hi))


# ---------------------------------------------------------------------------
# Monte Carlo


def _is_member(target: Grammar | Automaton, word: tuple[int, ...]) -> bool:
    if isinstance(target, Automaton):
        return target.accepts(word)
    return derives(target, word)


def monte_carlo_measure(
    target: Grammar | Automaton, samples: int, seed: int
) -> Measure:
    """Sample the coin-flip process and test membership; Wilson 99%
    half-width around the raw acceptance proportion."""
    if samples < 1:
        raise MeasureError("need at least one sample")
    n = len(target.alphabet)
    rng = random.Random(seed)
    hits = 0
    for _ in range(samples):
        word: list[int] = []
        while True:
            step = rng.randrange(n + 1)
            if step == n:
                break
            word.append(step)
            if len(word) > SAMPLE_LENGTH_CAP:
                raise MeasureError(
                    f"sampled word exceeded {SAMPLE_LENGTH_CAP} letters; "
                    "astronomically unlikely under the coin-flip process"
                )
        if _is_member(target, tuple(word)):
            hits += 1
    p = hits / samples
    z = WILSON_Z_99
    denom = 1 + z * z / samples
    half = (z / denom) * math.sqrt(p * (1 - p) / samples + z * z / (4 * samples * samples))
    return Measure.estimate(p, half, 0.99, samples, seed)
