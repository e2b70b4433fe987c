"""Square-root-sum instances compiled to measure comparison queries.

An instance asks whether sqrt(d_1) + ... + sqrt(d_n) ~ d_0 for
nonnegative integers d_i and a comparison operator.  The compiler emits
an unambiguous grammar G over an n-letter alphabet and a rational
threshold epsilon such that mu(L(G)) ~' epsilon decides the instance,
where ~' mirrors ~ (the root sum enters the measure with a minus sign,
so the comparison flips).

Each branch language D_i has measure x_i = 1 - sqrt(d_i)/d, realised as
a disjoint union that makes the quadratic identity x = c + x^2/2 hold
literally at the level of measures:

    D_i  =  C_i  |+|  P a_n Q_i

C_i is a finite-or-star language over a_1..a_{n-1} of measure
c_i = (1 - d_i/d^2)/2, built greedily level by level.  P is the set of
all a_n-free words, of measure exactly 1/2; splitting a word of
P a_n Q_i at its first a_n is forced, so the concatenation contributes
mu(P) * mu(Q_i) = mu(Q_i)/2.  Q_i has measure x_i^2 exactly: a plain
representation when d_i is a perfect square (x_i rational), and
otherwise a union B_i Y_i |+| F_i where B_i is a block of 2w words of a
fixed length, Y_i -> E_i | a_{n-1} Y_i a_n Y_i is an unambiguous
bracket language whose leaf E_i keeps the brackets out, and F_i fills
the remaining rational mass.  The least solution of
y = mu(E_i) + y^2/(n+1) is beta/2 - (beta^j/w) sqrt(d_i), so the
irrational parts telescope and every emitted constant stays an exact
rational.  The block size w is chosen with all prime factors dividing
n+1 so that mu(E_i) has a representable denominator; such a choice
exists because normalisation gives n+1 at least two distinct prime
factors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

from .alphabet import Alphabet, FormatError
from .grammar import Grammar, check_unambiguous_bounded
from .gnf import to_short_gnf
from .intervals import IntervalRational, sqrt_interval
from .measure import (
    ComparisonQuery,
    compare_measure,
    regular_measure_exact,
    trivial_epsilon_decision,
    ucfg_measure,
)
from .regexes import (
    Regex,
    concat_all,
    power,
    r_concat,
    r_letter,
    r_star,
    regex_to_nfa,
    union_all,
)

# instance operator on the root sum -> operator on the measure side
FLIP = {">=": "<=", "<=": ">=", ">": "<", "<": ">"}

_CMP = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


class RepresentationError(ValueError):
    """A target measure cannot be realised with the given letter budget."""


@dataclass(frozen=True)
class SqrtSumInstance:
    """Normalised instance: n odd >= 3 and max d_i = (n+1)^(2h) exactly."""

    d0: int
    ds: tuple[int, ...]
    op: str
    h: int

    def __post_init__(self) -> None:
        if self.op not in FLIP:
            raise FormatError(f"unknown comparison operator {self.op!r}")
        if self.d0 < 0 or any(x < 0 for x in self.ds):
            raise ValueError("instance values must be nonnegative")
        n = len(self.ds)
        if n < 3 or n % 2 == 0:
            raise ValueError(f"instance needs an odd count >= 3 of radicands, got {n}")
        if max(self.ds) != self.d:
            raise ValueError(
                f"max radicand {max(self.ds)} differs from (n+1)^(2h) = {self.d}"
            )

    @property
    def n(self) -> int:
        return len(self.ds)

    @property
    def d(self) -> int:
        return (self.n + 1) ** (2 * self.h)


def parse_instance(text: str) -> tuple[int, tuple[int, ...], str]:
    """Read `{"d0": int, "d": [ints], "op": cmp}`; raw, not yet normalised."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"instance is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise FormatError("instance JSON must be an object")
    extra = set(obj) - {"d0", "d", "op"}
    if extra:
        raise FormatError(f"unknown instance keys: {sorted(extra)}")
    for key in ("d0", "d", "op"):
        if key not in obj:
            raise FormatError(f"instance is missing key {key!r}")
    d0, ds, op = obj["d0"], obj["d"], obj["op"]
    if not isinstance(d0, int) or isinstance(d0, bool) or d0 < 0:
        raise FormatError("d0 must be a nonnegative integer")
    if not isinstance(ds, list) or not all(
        isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in ds
    ):
        raise FormatError("d must be a list of nonnegative integers")
    if op not in FLIP:
        raise FormatError(f"op must be one of {sorted(FLIP)}, got {op!r}")
    return d0, tuple(ds), op


def print_instance(d0: int, ds: tuple[int, ...], op: str) -> str:
    return json.dumps({"d0": d0, "d": list(ds), "op": op}, sort_keys=True) + "\n"


def _pad_exponent(base: int, lo: int) -> int:
    """Minimal h with base^(2h) >= lo."""
    h = 0
    while base ** (2 * h) < lo:
        h += 1
    return h


def normalise_instance(d0: int, ds: tuple[int, ...] | list[int], op: str) -> SqrtSumInstance:
    """Pad until n is odd >= 5, n+1 has two distinct prime factors, and the
    max radicand is exactly (n+1)^(2h).

    Each padding step appends a perfect square (n+2)^(2h), computed in
    the base the instance will have after the insertion, and adds its
    exact root (n+2)^h to d_0, which leaves the comparison unchanged.
    Inputs already in that shape come back as-is.  The floor of 5 keeps
    three letters free for the bracket-language leaves, and a base with
    two distinct primes is what the block-size search needs; both only
    matter for non-square radicands but are applied uniformly so the
    output never depends on squareness.
    """
    if op not in FLIP:
        raise FormatError(f"unknown comparison operator {op!r}")
    vals = list(ds)
    if d0 < 0 or any(x < 0 for x in vals):
        raise ValueError("instance values must be nonnegative")
    while True:
        n = len(vals)
        beta = n + 1
        if n >= 5 and n % 2 == 1 and beta & (beta - 1) != 0:
            mx = max(vals)
            h = _pad_exponent(beta, mx)
            if beta ** (2 * h) == mx:
                return SqrtSumInstance(d0, tuple(vals), op, h)
        base = n + 2
        h = _pad_exponent(base, max(vals, default=0))
        vals.append(base ** (2 * h))
        d0 += base**h


# ---------------------------------------------------------------------------
# representation of rational measures by unambiguous expressions


def _lex_prefix_blocks(t: int, length: int, letters: tuple[str, ...], full: Regex) -> Regex:
    """The first t words of length `length` over `letters`, lexicographically.

    Writing t in base m yields one block per nonzero digit: a fixed
    prefix, a choice among the first few letters at one position, and
    free positions after it.  Distinct blocks differ at their first
    non-prefix position, so the union is unambiguous.
    """
    m = len(letters)
    if t == m**length:
        return power(full, length)
    digits = []
    rem = t
    for j in range(length):
        unit = m ** (length - 1 - j)
        digits.append(rem // unit)
        rem %= unit
    blocks: list[Regex] = []
    prefix: list[Regex] = []
    for j, g in enumerate(digits):
        if g:
            choice = union_all([r_letter(x) for x in letters[:g]])
            blocks.append(concat_all(prefix + [choice] + [full] * (length - 1 - j)))
        prefix.append(r_letter(letters[g]))
    return union_all(blocks)


def _lex_suffix_blocks(lo: int, length: int, letters: tuple[str, ...], full: Regex) -> Regex:
    """The words of length `length` with lexicographic index >= lo.

    Mirror image of the prefix blocks: one block per position where a
    larger letter can be chosen under the fixed prefix of the boundary
    word, plus the boundary word itself.
    """
    m = len(letters)
    if lo == 0:
        return power(full, length)
    digits = []
    rem = lo
    for j in range(length):
        unit = m ** (length - 1 - j)
        digits.append(rem // unit)
        rem %= unit
    blocks: list[Regex] = []
    prefix: list[Regex] = []
    for j, g in enumerate(digits):
        if g < m - 1:
            choice = union_all([r_letter(x) for x in letters[g + 1 :]])
            blocks.append(concat_all(prefix + [choice] + [full] * (length - 1 - j)))
        prefix.append(r_letter(letters[g]))
    blocks.append(concat_all(list(prefix)))
    return union_all(blocks)


def representation_regex(n: int, m: int, p: int, q: int, level: int) -> Regex:
    """Unambiguous expression over a_1..a_m with coin-flip measure p/q.

    Measures are taken in base n+1 (a word of length L weighs
    (n+1)^-(L+1)).  Works by greedy digit expansion: level k holds words
    of length k-1, capped at m^(k-1) of them; a remainder that exactly
    matches the full suffix tail becomes a star.  Preconditions: the
    reduced denominator divides (n+1)^level and p/q <= 1/(n-m+1), the
    measure of all words over m letters.
    """
    beta = n + 1
    if not 1 <= m <= n:
        raise RepresentationError(f"letter budget m={m} outside 1..{n}")
    if q <= 0 or p < 0:
        raise RepresentationError(f"target {p}/{q} is not a nonnegative rational")
    c = Fraction(p, q)
    if c > Fraction(1, n - m + 1):
        raise RepresentationError(
            f"target {c} exceeds 1/{n - m + 1}, the measure of all words over {m} letters"
        )
    if level < 0 or beta**level % c.denominator != 0:
        raise RepresentationError(
            f"reduced denominator {c.denominator} does not divide {beta}^{level}"
        )
    letters = tuple(f"a{i}" for i in range(1, m + 1))
    full = union_all([r_letter(x) for x in letters])
    parts: list[Regex] = []
    rho = c
    k = 1
    # termination: while rho stays below the tail, the gap to it grows by
    # a factor beta/m per level, so the drain finishes in O(level * n * log n)
    # levels; the cap below only guards against construction bugs
    max_k = 16 + 2 * (level + 2) * (n + 2) * max(1, (n + 1).bit_length())
    while rho > 0:
        length = k - 1
        tail = Fraction(m, beta) ** length / (beta - m)
        if rho == tail:
            parts.append(concat_all([power(full, length), r_star(full)]))
            rho = Fraction(0)
            break
        if rho > tail:
            raise RepresentationError(
                f"remainder {rho} exceeds tail capacity {tail} at level {k}"
            )
        if k > max_k:
            raise RepresentationError(f"representation did not drain by level {max_k}")
        t = min(m**length, int(rho * beta**k))
        if t:
            parts.append(_lex_prefix_blocks(t, length, letters, full))
            rho -= Fraction(t, beta**k)
        k += 1
    return union_all(parts)


def _representation_avoiding_top(n: int, target: Fraction, keep: int, lb: int) -> Regex:
    """Representation of `target` over all n letters that avoids every word
    whose length-lb prefix lies in the top n^lb - keep of the lexicographic
    order (the space reserved for a block language).

    Same greedy drain as representation_regex, with level capacities cut
    to keep * n^(len-lb) from length lb on.  The usable space at every
    deep level is a lexicographic initial segment, so the standard
    prefix blocks stay inside it.
    """
    beta = n + 1
    if not 0 < keep <= n**lb or lb < 1:
        raise RepresentationError(f"kept prefix count {keep} outside 1..{n}^{lb}")
    if target < 0:
        raise RepresentationError(f"target {target} is negative")
    letters = tuple(f"a{i}" for i in range(1, n + 1))
    full = union_all([r_letter(x) for x in letters])
    nl = Fraction(n, beta)
    deep = Fraction(keep, beta**lb)

    def avail(length: int) -> int:
        return n**length if length < lb else keep * n ** (length - lb)

    def tail(length: int) -> Fraction:
        if length >= lb:
            return Fraction(keep * n ** (length - lb), beta**length)
        return nl**length - nl**lb + deep

    def tail_regex(length: int) -> Regex:
        kept = _lex_prefix_blocks(keep, lb, letters, full)
        if length >= lb:
            return concat_all([kept, power(full, length - lb), r_star(full)])
        finite = [power(full, ll) for ll in range(length, lb)]
        return union_all(finite + [r_concat(kept, r_star(full))])

    parts: list[Regex] = []
    rho = Fraction(target)
    max_len = 16 + 2 * (lb + target.denominator.bit_length() + 2) * (n + 2)
    length = 0
    while rho > 0:
        cap = tail(length)
        if rho == cap:
            parts.append(tail_regex(length))
            rho = Fraction(0)
            break
        if rho > cap:
            raise RepresentationError(
                f"remainder {rho} exceeds tail capacity {cap} at length {length}"
            )
        if length > max_len:
            raise RepresentationError(f"representation did not drain by length {max_len}")
        t = min(avail(length), int(rho * beta ** (length + 1)))
        if t:
            parts.append(_lex_prefix_blocks(t, length, letters, full))
            rho -= Fraction(t, beta ** (length + 1))
        length += 1
    return union_all(parts)


def _regex_productions(e: Regex, root: str, prods: dict) -> None:
    """Productions for L(e) rooted at `root`; auxiliaries named root_k.

    Union alternatives become separate bodies, concatenations become
    symbol sequences, and each star turns into a right-recursive rule.
    Shared subexpression objects share one auxiliary.
    """
    counter = [0]
    cache: dict[int, str] = {}

    def alts(x: Regex) -> list[Regex]:
        if x.kind == "union":
            return alts(x.left) + alts(x.right)
        return [x]

    def seq(x: Regex) -> list[str]:
        if x.kind == "epsilon":
            return []
        if x.kind == "letter":
            return [x.letter]
        if x.kind == "concat":
            return seq(x.left) + seq(x.right)
        return [aux(x)]

    def aux(x: Regex) -> str:
        if id(x) in cache:
            return cache[id(x)]
        counter[0] += 1
        name = f"{root}_{counter[0]}"
        cache[id(x)] = name
        if x.kind == "union":
            prods[name] = [tuple(seq(p)) for p in alts(x)]
        elif x.kind == "star":
            prods[name] = [(), tuple(seq(x.left) + [name])]
        else:  # empty
            prods[name] = []
        return name

    if e.kind == "union":
        prods[root] = [tuple(seq(p)) for p in alts(e)]
    elif e.kind == "empty":
        prods[root] = []
    else:
        prods[root] = [tuple(seq(e))]


# ---------------------------------------------------------------------------
# block-size search


def _distinct_primes(x: int) -> tuple[int, ...]:
    primes: list[int] = []
    p = 2
    while p * p <= x:
        if x % p == 0:
            primes.append(p)
            while x % p == 0:
                x //= p
        p += 1
    if x > 1:
        primes.append(x)
    return tuple(primes)


def _smooth_in_range(lo: int, hi: int, primes: tuple[int, ...]) -> int | None:
    """Smallest product of powers of `primes` in [lo, hi], or None."""
    best: int | None = None

    def walk(idx: int, val: int) -> None:
        nonlocal best
        if val > hi or (best is not None and val >= best):
            return
        if val >= lo:
            best = val
        if idx == len(primes):
            return
        p = primes[idx]
        v = val
        while True:
            walk(idx + 1, v)
            if v > hi // p:
                break
            v *= p

    walk(0, 1)
    return best


def _beta_level(beta: int, q: int, cap: int) -> int:
    """Minimal level with q | beta^level; `cap` guards against bad q."""
    level = 0
    power_ = 1
    while power_ % q != 0:
        level += 1
        power_ *= beta
        if level > cap:
            raise RepresentationError(
                f"denominator {q} does not divide a power of {beta} (up to {beta}^{cap})"
            )
    return level


def _dyck_window(n: int, h: int, di: int, primes: tuple[int, ...]) -> tuple[int, int]:
    """Length offset j and block root w for a non-square radicand.

    Needs w with only primes of beta = n+1 such that
    beta^(2j) d_i / w^2 lands in [beta^2/4 - beta/3, beta^2/4), which
    makes the bracket-leaf measure beta/4 - beta^(2j-1) d_i/w^2 land in
    (0, 1/3].  Growing j rescales the window by beta, and powers of two
    distinct primes come arbitrarily close to any ratio, so the search
    terminates; the cap is a safety net.
    """
    beta = n + 1
    if len(primes) < 2:
        raise RepresentationError(
            f"base {beta} is a prime power; block-size search needs two distinct primes"
        )
    for j in range(1, 64 + 8 * max(1, di.bit_length())):
        lo_sq = 4 * beta ** (2 * j - 2) * di
        lo = isqrt(lo_sq)
        if lo * lo < lo_sq:
            lo += 1
        hi_num = 12 * beta ** (2 * j - 1) * di
        hi = isqrt(hi_num // (3 * beta - 4)) + 2
        while hi * hi * (3 * beta - 4) > hi_num:
            hi -= 1
        # leave the block and a beta-sized margin inside the length-(2h+j)
        # space so the filler greedy always has room for its digits
        hi = min(hi, (n ** (2 * h + j) - beta) // 2)
        if hi < lo:
            continue
        w = _smooth_in_range(lo, hi, primes)
        if w is not None:
            return j, w
    raise RepresentationError(
        f"no smooth block size found for radicand {di} over base {beta}"
    )


# ---------------------------------------------------------------------------
# grammar construction


@dataclass(frozen=True)
class Piece:
    """One regular constituent of the branch languages, with the exact
    measure it was built to have.  role: c | prefix | blocks | leaf |
    filler | remainder."""

    name: str
    role: str
    regex: Regex
    target: Fraction


@dataclass
class ReductionOutput:
    grammar: Grammar
    epsilon: Fraction
    cs: tuple[Fraction, ...]
    # x_i = u + v*sqrt(d_i), stored as exact coefficient pairs (u, v)
    xs: tuple[tuple[Fraction, Fraction], ...]
    a_weight: Fraction
    pieces: tuple[Piece, ...]
    metadata: dict = field(default_factory=dict)


def build_reduction(inst: SqrtSumInstance) -> ReductionOutput:
    """The grammar G and threshold epsilon deciding the instance.

    Productions: X0 branches on the first letter into the D_i; each D_i
    is C_i | P a_n Q_i with P the a_n-free words.  Unambiguity is
    structural throughout: the branch letter, the first a_n, the fixed
    block length, the first return to bracket balance, and the first
    differing letter of a lexicographic block each force their split.
    """
    n, d, h = inst.n, inst.d, inst.h
    beta = n + 1
    alpha = Alphabet(tuple(f"a{i}" for i in range(1, n + 1)))
    letters = alpha.letters
    closer = letters[-1]
    opener = letters[-2]
    full = union_all([r_letter(x) for x in letters])
    prefix_free = r_star(union_all([r_letter(x) for x in letters[:-1]]))
    prods: dict = {}
    prods["X0"] = [(f"a{i}", f"D{i}") for i in range(1, n + 1)]
    prods["P"] = [()] + [(x, "P") for x in letters[:-1]]
    pieces: list[Piece] = [Piece("P", "prefix", prefix_free, Fraction(1, 2))]
    cs: list[Fraction] = []
    xs: list[tuple[Fraction, Fraction]] = []
    branches: list[dict] = []
    primes = _distinct_primes(beta)
    for i in range(1, n + 1):
        di = inst.ds[i - 1]
        ci = Fraction(d * d - di, 2 * d * d)
        cs.append(ci)
        xs.append((Fraction(1), Fraction(-1, d)))
        c_reg = representation_regex(
            n, n - 1, ci.numerator, ci.denominator,
            _beta_level(beta, ci.denominator, 4 * h + 2),
        )
        _regex_productions(c_reg, f"C{i}", prods)
        pieces.append(Piece(f"C{i}", "c", c_reg, ci))
        root = isqrt(di)
        if root * root == di:
            xq = Fraction(d - root, d) ** 2
            q_reg = representation_regex(
                n, n, xq.numerator, xq.denominator,
                _beta_level(beta, xq.denominator, 4 * h + 2),
            )
            _regex_productions(q_reg, f"Q{i}", prods)
            pieces.append(Piece(f"Q{i}", "remainder", q_reg, xq))
            branches.append({"i": i, "kind": "square", "root": root, "remainder": xq})
        else:
            if n < 5:
                raise RepresentationError(
                    "non-square radicands need at least five letters "
                    "(three of them leaf-only); renormalise the instance"
                )
            j, w = _dyck_window(n, h, di, primes)
            lb = 2 * h + j
            leaf = Fraction(beta, 4) - Fraction(beta ** (2 * j - 1) * di, w * w)
            filler = 1 + Fraction(di, d * d) - Fraction(w, beta ** (lb - 1))
            keep = n**lb - 2 * w
            block_mass = Fraction(2 * w, beta ** (lb + 1))
            if not 0 < leaf <= Fraction(1, 3) or filler < 0 or keep < beta:
                raise RepresentationError(
                    f"window search returned unusable parameters for d_{i} = {di}"
                )
            b_reg = _lex_suffix_blocks(keep, lb, letters, full)
            _regex_productions(b_reg, f"B{i}", prods)
            leaf_level = _beta_level(
                beta, leaf.denominator, 4 * h + 2 * j + 2 * leaf.denominator.bit_length()
            )
            e_reg = representation_regex(
                n, n - 2, leaf.numerator, leaf.denominator, leaf_level
            )
            _regex_productions(e_reg, f"E{i}", prods)
            prods[f"Y{i}"] = [(f"E{i}",), (opener, f"Y{i}", closer, f"Y{i}")]
            f_reg = _representation_avoiding_top(n, filler, keep, lb)
            _regex_productions(f_reg, f"F{i}", prods)
            prods[f"Q{i}"] = [(f"B{i}", f"Y{i}"), (f"F{i}",)]
            pieces.append(Piece(f"B{i}", "blocks", b_reg, block_mass))
            pieces.append(Piece(f"E{i}", "leaf", e_reg, leaf))
            pieces.append(Piece(f"F{i}", "filler", f_reg, filler))
            branches.append(
                {
                    "i": i,
                    "kind": "window",
                    "j": j,
                    "w": w,
                    "block_len": lb,
                    "leaf": leaf,
                    "filler": filler,
                }
            )
        prods[f"D{i}"] = [(f"C{i}",), ("P", closer, f"Q{i}")]
    g = Grammar(alpha, "X0", prods, unambiguity_status="claimed")
    epsilon = Fraction(n - Fraction(inst.d0, d), beta)
    meta = {
        "n": n,
        "h": h,
        "d": d,
        "grammar_size": g.size(),
        "instance_op": inst.op,
        "measure_op": FLIP[inst.op],
        "branches": tuple(branches),
    }
    return ReductionOutput(
        g, epsilon, tuple(cs), tuple(xs), Fraction(1, 2), tuple(pieces), meta
    )


# ---------------------------------------------------------------------------
# self-verification


def _interval_decide(lo: Fraction, hi: Fraction, op: str, rhs: Fraction) -> str:
    every = {"<=": hi <= rhs, "<": hi < rhs, ">": lo > rhs, ">=": lo >= rhs}[op]
    if every:
        return "holds"
    none = {"<=": lo > rhs, "<": lo >= rhs, ">": hi <= rhs, ">=": hi < rhs}[op]
    if none:
        return "fails"
    return "undecided"


def direct_compare(inst: SqrtSumInstance, bits: int = 256) -> tuple[str, bool]:
    """Decide the root-sum comparison directly; returns (decision, tie).

    Exact integer arithmetic when every radicand is a perfect square,
    directed-rounding enclosures otherwise.  Non-square enclosures
    cannot settle an exact tie, which comes back as ("undecided", True).
    """
    roots = [isqrt(x) for x in inst.ds]
    if all(r * r == x for r, x in zip(roots, inst.ds)):
        total = sum(roots)
        decision = "holds" if _CMP[inst.op](total, inst.d0) else "fails"
        return decision, total == inst.d0
    s = IntervalRational.point(Fraction(0))
    for x in inst.ds:
        s = s + sqrt_interval(x, bits)
    decision = _interval_decide(s.lo, s.hi, inst.op, Fraction(inst.d0))
    return decision, decision == "undecided"


def _claimed_short_gnf(g: Grammar) -> Grammar:
    gs = to_short_gnf(g)
    return Grammar(
        gs.alphabet,
        gs.start,
        {x: list(b) for x, b in gs.productions.items()},
        unambiguity_status="claimed",
    )


def _interval_gap(a: IntervalRational, b: IntervalRational) -> Fraction:
    return max(Fraction(0), a.lo - b.hi, b.lo - a.hi)


def _regex_letters(x: Regex) -> set[str]:
    if x.kind == "letter":
        return {x.letter}
    found: set[str] = set()
    for sub in (x.left, x.right):
        if sub is not None:
            found |= _regex_letters(sub)
    return found


def verify_reduction(
    out: ReductionOutput,
    inst: SqrtSumInstance,
    tol: Fraction = Fraction(1, 10**6),
    unambiguity_bound: int = 8,
) -> dict:
    """End-to-end checks of a built reduction; returns a report dict.

    Exact checks: every constructed regular piece has exactly its
    prescribed measure (linear-solve oracle), in particular each C_i
    equals c_i; the pieces stay inside their sub-alphabets; the fixpoint
    residual x_i - c_i - x_i^2/2 vanishes identically in Q[sqrt(d_i)];
    and the branch assembly identities hold in exact arithmetic.
    Numeric checks at tolerance `tol`: the grammar measure interval
    against the closed form (n - sum sqrt(d_i)/d)/(n+1), each branch
    measure against x_i together with the quadratic identity
    mu(D_i) = c_i + mu(D_i)^2/2, and the comparison verdict against the
    direct root-sum comparison (a tie can honestly stay undecided on
    the measure side).
    """
    tol = Fraction(tol)
    n, d = inst.n, inst.d
    beta = n + 1
    a = out.a_weight
    report: dict = {"ok": True}

    def fail(key: str) -> None:
        report[key] = False
        report["ok"] = False

    # exact measures of every constructed regular piece
    piece_ok = True
    c_ok = True
    for p in out.pieces:
        nfa = regex_to_nfa(p.regex, out.grammar.alphabet)
        if regular_measure_exact(nfa) != p.target:
            piece_ok = False
            if p.role == "c":
                c_ok = False
    report["piece_measures_exact"] = piece_ok
    report["c_measures_exact"] = c_ok
    if not piece_ok:
        fail("piece_measures_exact")
    if not c_ok:
        fail("c_measures_exact")

    # sub-alphabet confinement: C_i and P avoid the top letter, bracket
    # leaves avoid both bracket letters
    closer = out.grammar.alphabet.letters[-1]
    opener = out.grammar.alphabet.letters[-2]
    confined = True
    for p in out.pieces:
        used = _regex_letters(p.regex)
        if p.role in ("c", "prefix") and closer in used:
            confined = False
        if p.role == "leaf" and (closer in used or opener in used):
            confined = False
    report["letters_confined"] = confined
    if not confined:
        fail("letters_confined")

    # fixpoint residuals, exact in Q[sqrt(d_i)]
    res_ok = True
    for (u, v), ci, di in zip(out.xs, out.cs, inst.ds):
        r_real = u - ci - a * (u * u + v * v * di)
        r_coef = v - 2 * a * u * v
        if r_real != 0 or r_coef != 0:
            res_ok = False
    report["residuals_zero"] = res_ok
    if not res_ok:
        fail("residuals_zero")

    # assembly identities, exact: the pieces sum to mu(Q_i) = x_i^2 and
    # c_i + mu(Q_i)/2 = x_i, with sqrt(d_i)-coefficients tracked as pairs
    asm_ok = True
    for br, ci, di, (u, v) in zip(
        out.metadata["branches"], out.cs, inst.ds, out.xs
    ):
        if br["kind"] == "square":
            x = u + v * br["root"]
            if br["root"] ** 2 != di or br["remainder"] != x * x:
                asm_ok = False
            if ci + a * br["remainder"] != x:
                asm_ok = False
        else:
            j, w, lb = br["j"], br["w"], br["block_len"]
            leaf, filler = br["leaf"], br["filler"]
            yu, yv = Fraction(beta, 2), Fraction(-(beta**j), w)
            if yu - leaf - (yu * yu + yv * yv * di) / beta != 0:
                asm_ok = False
            if yv - 2 * yu * yv / beta != 0:
                asm_ok = False
            block_mass = Fraction(2 * w, beta ** (lb + 1))
            qu = beta * block_mass * yu + filler
            qv = beta * block_mass * yv
            if qu != 1 + Fraction(di, d * d) or qv != Fraction(-2, d):
                asm_ok = False
            if ci + a * qu != u or a * qv != v:
                asm_ok = False
    report["assembly_identities_zero"] = asm_ok
    if not asm_ok:
        fail("assembly_identities_zero")

    # closed form vs certified grammar measure
    s = IntervalRational.point(Fraction(0))
    for di in inst.ds:
        s = s + sqrt_interval(di, 256)
    direct = (IntervalRational.point(Fraction(n)) - s.scale(Fraction(1, d))).scale(
        Fraction(1, beta)
    )
    report["direct_interval"] = direct
    gs = _claimed_short_gnf(out.grammar)
    mu = ucfg_measure(gs, tol=tol / 4)
    lo, hi = mu.bounds()
    measured = IntervalRational(lo, hi)
    report["measure_interval"] = measured
    agree = _interval_gap(direct, measured) <= tol and measured.width <= tol
    report["measure_matches_formula"] = agree
    if not agree:
        fail("measure_matches_formula")

    # per-branch numerics: mu(D_i) against x_i and against the quadratic
    branch_ok = True
    quad_ok = True
    for i in range(1, n + 1):
        gi = Grammar(
            out.grammar.alphabet,
            f"D{i}",
            {x: list(b) for x, b in out.grammar.productions.items()},
            unambiguity_status="claimed",
        )
        mi = ucfg_measure(_claimed_short_gnf(gi), tol=tol / 4)
        ilo, ihi = mi.bounds()
        xi = IntervalRational.point(Fraction(1)) - sqrt_interval(
            inst.ds[i - 1], 256
        ).scale(Fraction(1, d))
        if _interval_gap(IntervalRational(ilo, ihi), xi) > tol:
            branch_ok = False
        sq = IntervalRational(ilo * ilo, ihi * ihi)
        resid = IntervalRational(ilo, ihi) - (
            IntervalRational.point(out.cs[i - 1]) + sq.scale(a)
        )
        if max(resid.lo, -resid.hi, Fraction(0)) > tol:
            quad_ok = False
    report["branch_measures_within_tol"] = branch_ok
    if not branch_ok:
        fail("branch_measures_within_tol")
    report["quadratic_identity_within_tol"] = quad_ok
    if not quad_ok:
        fail("quadratic_identity_within_tol")

    # comparison verdicts
    measure_op = FLIP[inst.op]
    direct_decision, tie = direct_compare(inst)
    report["direct_decision"] = direct_decision
    report["tie"] = tie
    trivial = trivial_epsilon_decision(measure_op, out.epsilon)
    if trivial is not None:
        cmp_decision = trivial.decision
    else:
        cmp_decision = compare_measure(
            ComparisonQuery(gs, out.epsilon, measure_op), tol=tol / 4
        ).decision
    report["compare_decision"] = cmp_decision
    matches = cmp_decision == direct_decision or (tie and cmp_decision == "undecided")
    report["compare_matches_direct"] = matches
    if not matches:
        fail("compare_matches_direct")

    rep = check_unambiguous_bounded(out.grammar, unambiguity_bound)
    report["unambiguous_to_bound"] = rep.ok
    report["unambiguity_bound"] = unambiguity_bound
    if not rep.ok:
        report["ambiguity_witness"] = rep.witness
        fail("unambiguous_to_bound")
    report["grammar_size"] = out.grammar.size()
    report["size_base"] = n + sum((x + 2).bit_length() for x in inst.ds)
    return report
