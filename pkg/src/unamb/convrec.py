"""Convolution-recursive sequence systems.

A system defines sequences f_1..f_k by initial values f_i(0) and shift
equations sigma f_i = p_i(f_1..f_k), where the p_i are polynomials whose
multiplication is convolution, (f*g)(n) = sum_{j<=n} f(j)g(n-j), and a
constant c stands for the sequence c,0,0,...  The first variable is the
distinguished sequence of the system.

Words-per-length counting functions of short-GNF grammars are exactly
such systems: each production X <- aYZ contributes a convolution term
f_Y * f_Z to sigma f_X.  Universality of an unambiguous grammar over
Sigma becomes zeroness of |Sigma|^n - f_S(n), also expressible here.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .alphabet import FormatError
from .grammar import Grammar, trim

Monomial = tuple[int, ...]  # sorted variable indices, repeats allowed


class ConvRecError(ValueError):
    """Raised for malformed systems or unmet preconditions."""


def _as_number(x: Fraction | int):
    """Prefer plain ints: integer systems then evaluate in pure integer
    arithmetic, which is much faster than Fraction for long prefixes."""
    f = Fraction(x)
    return f.numerator if f.denominator == 1 else f


@dataclass(frozen=True)
class ConvPolynomial:
    """Sparse polynomial: monomial (sorted variable index tuple) -> coefficient.
    The empty monomial is the constant term (sequence c,0,0,...)."""

    terms: tuple[tuple[Monomial, Fraction], ...]

    @staticmethod
    def from_dict(d: dict[Monomial, Fraction]) -> ConvPolynomial:
        items = []
        for mono, coef in d.items():
            coef = Fraction(coef)
            if coef != 0:
                items.append((tuple(sorted(mono)), coef))
        items.sort(key=lambda t: (len(t[0]), t[0]))
        return ConvPolynomial(tuple(items))

    @staticmethod
    def zero() -> ConvPolynomial:
        return ConvPolynomial(())

    @staticmethod
    def constant(c: Fraction) -> ConvPolynomial:
        return ConvPolynomial.from_dict({(): Fraction(c)})

    @property
    def degree(self) -> int:
        return max((len(m) for m, _ in self.terms), default=0)

    def add(self, other: ConvPolynomial) -> ConvPolynomial:
        d: dict[Monomial, Fraction] = dict(self.terms)
        for mono, coef in other.terms:
            d[mono] = d.get(mono, Fraction(0)) + coef
        return ConvPolynomial.from_dict(d)

    def scale(self, c: Fraction) -> ConvPolynomial:
        c = Fraction(c)
        return ConvPolynomial.from_dict({m: k * c for m, k in self.terms})

    def mul_var(self, var: int) -> ConvPolynomial:
        """Multiply (convolve) by the sequence of variable `var`."""
        return ConvPolynomial.from_dict(
            {tuple(sorted(m + (var,))): k for m, k in self.terms}
        )

    def shift_vars(self, offset: int) -> ConvPolynomial:
        return ConvPolynomial.from_dict(
            {tuple(i + offset for i in m): k for m, k in self.terms}
        )

    def max_var(self) -> int:
        return max((max(m) for m, _ in self.terms if m), default=-1)

    def eval_ordinary(self, values: list) :
        """Evaluate as an ordinary polynomial (products, not convolutions)."""
        total = 0
        for mono, coef in self.terms:
            acc = coef
            for v in mono:
                acc = acc * values[v]
            total = total + acc
        return total


@dataclass
class ConvRecSystem:
    names: tuple[str, ...]
    initials: tuple[Fraction, ...]
    polys: tuple[ConvPolynomial, ...]

    def __post_init__(self) -> None:
        self.initials = tuple(Fraction(x) for x in self.initials)
        k = len(self.names)
        if not (k == len(self.initials) == len(self.polys)):
            raise ConvRecError("names, initials, and polynomials must align")
        if len(set(self.names)) != k:
            raise ConvRecError("duplicate variable names")
        for p in self.polys:
            if p.max_var() >= k:
                raise ConvRecError("polynomial references an undeclared variable")

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def combined_degree(self) -> int:
        return sum(p.degree for p in self.polys)


def ratio_bound(s: ConvRecSystem) -> tuple[int, float]:
    """Combined degree d and the growth-ratio bound d*e: eventually
    f(n+1)/f(n) stays below it for nonnegative systems."""
    d = s.combined_degree
    return d, d * math.e


# ---------------------------------------------------------------------------
# evaluation


def eval_prefix(s: ConvRecSystem, N: int) -> list[list]:
    """Exact table of f_i(n) for 0 <= n <= N.

    Each convolution monomial keeps incremental partial-product prefix
    tables, so the total cost is O(combined degree * N^2) coefficient
    operations instead of naive repeated convolution.
    """
    if N < 0:
        raise ConvRecError("negative prefix length")
    vals = [[_as_number(x)] for x in s.initials]
    # shared partial tables per distinct monomial of size >= 2:
    # levels[l] holds (f_{m0} * ... * f_{ml+1}) as a growing list
    monos: dict[Monomial, list[list]] = {}
    for p in s.polys:
        for mono, _ in p.terms:
            if len(mono) >= 2 and mono not in monos:
                monos[mono] = [[] for _ in range(len(mono) - 1)]

    coefs = [
        [(tuple(mono), _as_number(coef)) for mono, coef in p.terms]
        for p in s.polys
    ]

    for n in range(N):
        for mono, levels in monos.items():
            prev = vals[mono[0]]
            for l, arr in enumerate(levels):
                right = vals[mono[l + 1]]
                acc = 0
                for j in range(n + 1):
                    pj = prev[j]
                    if pj:
                        acc += pj * right[n - j]
                arr.append(acc)
                prev = arr
        for i, terms in enumerate(coefs):
            total = 0
            for mono, coef in terms:
                if not mono:
                    if n == 0:
                        total += coef
                elif len(mono) == 1:
                    total += coef * vals[mono[0]][n]
                else:
                    total += coef * monos[mono][-1][n]
            vals[i].append(total)
    return vals


# ---------------------------------------------------------------------------
# ring operations


def _unique_names(groups: list[tuple[str, ...]]) -> list[str]:
    out: list[str] = []
    seen: set[str] = set()
    for group in groups:
        for name in group:
            cand = name
            k = 2
            while cand in seen:
                cand = f"{name}_{k}"
                k += 1
            seen.add(cand)
            out.append(cand)
    return out


def ring_op(a: ConvRecSystem, b: ConvRecSystem, op: str) -> ConvRecSystem:
    """Combine two systems so the new distinguished sequence is
    a +/- b or a * b (convolution) of the old distinguished sequences."""
    if op not in ("add", "subtract", "convolve"):
        raise ConvRecError(f"unknown ring operation {op!r}")
    off_a, off_b = 1, 1 + a.k
    pa = [p.shift_vars(off_a) for p in a.polys]
    pb = [p.shift_vars(off_b) for p in b.polys]
    a0, b0 = a.initials[0], b.initials[0]
    if op == "add":
        head_poly = pa[0].add(pb[0])
        head_init = a0 + b0
    elif op == "subtract":
        head_poly = pa[0].add(pb[0].scale(Fraction(-1)))
        head_init = a0 - b0
    else:
        # sigma(f*g) = (sigma f)*g + f(0)*(sigma g)
        head_poly = pa[0].mul_var(off_b).add(pb[0].scale(a0))
        head_init = a0 * b0
    names = _unique_names([(op[:4],), a.names, b.names])
    return ConvRecSystem(
        tuple(names),
        (head_init,) + a.initials + b.initials,
        (head_poly,) + tuple(pa) + tuple(pb),
    )


# ---------------------------------------------------------------------------
# grammars as systems


def grammar_to_convrec(g: Grammar) -> ConvRecSystem:
    """Counting system of a short-GNF grammar: f_X(n) = number of
    derivation trees of words of length n from X (= word count when the
    grammar is unambiguous).  The grammar is trimmed first."""
    if not g.is_short_gnf:
        raise ConvRecError("grammar must be in short Greibach normal form")
    t, _ = trim(g)
    order = [t.start] + [x for x in t.productions if x != t.start]
    index = {x: i for i, x in enumerate(order)}
    initials = []
    polys = []
    for x in order:
        bodies = t.productions[x]
        initials.append(Fraction(1) if () in bodies else Fraction(0))
        terms: dict[Monomial, Fraction] = {}
        for body in bodies:
            if body == ():
                continue
            _, y, z = body
            mono = tuple(sorted((index[y], index[z])))
            terms[mono] = terms.get(mono, Fraction(0)) + 1
        polys.append(ConvPolynomial.from_dict(terms))
    return ConvRecSystem(tuple(order), tuple(initials), tuple(polys))


def universality_difference(g: Grammar) -> ConvRecSystem:
    """System whose distinguished sequence is |Sigma|^n - f_S(n); for an
    unambiguous grammar this is identically zero iff L(g) = Sigma*.

    |Sigma|^n is encoded linearly (sigma u = |Sigma| * u, u(0) = 1)."""
    base = grammar_to_convrec(g)
    size = Fraction(len(g.alphabet))
    off = 2
    shifted = [p.shift_vars(off) for p in base.polys]
    u_poly = ConvPolynomial.from_dict({(1,): size})
    diff_poly = u_poly.add(shifted[0].scale(Fraction(-1)))
    names = _unique_names([("diff", "u"), base.names])
    return ConvRecSystem(
        tuple(names),
        (Fraction(1) - base.initials[0], Fraction(1)) + base.initials,
        (diff_poly, u_poly) + tuple(shifted),
    )


# ---------------------------------------------------------------------------
# generating-function systems


@dataclass(frozen=True)
class GfSystem:
    """y_i = f_i(0) + x* . p_hat_i(y_1..y_k), the generating-function
    fixpoint system of a conv-rec system at evaluation point x*."""

    names: tuple[str, ...]
    initials: tuple[Fraction, ...]
    polys: tuple[ConvPolynomial, ...]
    x_star: Fraction
    combined_degree: int

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def within_radius(self) -> bool:
        """x* inside the guaranteed-uniqueness zone x < 1/d."""
        d = self.combined_degree
        return d == 0 or self.x_star * d < 1

    def apply(self, values: list) -> list:
        """F(y) = initials + x*.p_hat(y), evaluated exactly."""
        return [
            init + self.x_star * poly.eval_ordinary(values)
            for init, poly in zip(self.initials, self.polys)
        ]


def gf_system(s: ConvRecSystem, x_star: Fraction) -> GfSystem:
    x_star = Fraction(x_star)
    if x_star < 0:
        raise ConvRecError("evaluation point must be nonnegative")
    return GfSystem(s.names, s.initials, s.polys, x_star, s.combined_degree)


# ---------------------------------------------------------------------------
# zeroness


@dataclass(frozen=True)
class ZeronessVerdict:
    kind: str  # nonzero_at | zero_bounded | zero_certified | unknown
    n: int | None = None
    value: Fraction | int | None = None
    bound: int | None = None
    backend: str | None = None
    reason: str | None = None

    @staticmethod
    def nonzero_at(n: int, value) -> ZeronessVerdict:
        return ZeronessVerdict("nonzero_at", n=n, value=value)

    @staticmethod
    def zero_bounded(bound: int) -> ZeronessVerdict:
        return ZeronessVerdict("zero_bounded", bound=bound)

    @staticmethod
    def zero_certified(backend: str) -> ZeronessVerdict:
        return ZeronessVerdict("zero_certified", backend=backend)

    @staticmethod
    def unknown(reason: str) -> ZeronessVerdict:
        return ZeronessVerdict("unknown", reason=reason)

    def __str__(self) -> str:
        if self.kind == "nonzero_at":
            return f"nonzero_at({self.n}, {self.value})"
        if self.kind == "zero_bounded":
            return f"zero_bounded({self.bound})"
        if self.kind == "zero_certified":
            return f"zero_certified({self.backend})"
        return f"unknown({self.reason})"


@dataclass(frozen=True)
class ZeronessConfig:
    prefix_bound: int | None = None
    backend: str | None = None
    timeout: float = 60.0
    extend_factor: int = 4


def default_prefix_bound(s: ConvRecSystem) -> int:
    return max(64, 2 * s.k)


def _first_nonzero(row: list) -> int | None:
    for n, v in enumerate(row):
        if v != 0:
            return n
    return None


def zeroness(s: ConvRecSystem, cfg: ZeronessConfig = ZeronessConfig()) -> ZeronessVerdict:
    """Staged zeroness decision for the distinguished sequence.

    A prefix scan can only certify zero_bounded(N); full certification
    needs the SMT route (unsat of the exported sentence).  A sat answer
    is turned into a concrete index by extending the prefix scan; if none
    is found within the extended bound the verdict stays unknown."""
    N = cfg.prefix_bound if cfg.prefix_bound is not None else default_prefix_bound(s)
    row = eval_prefix(s, N)[0]
    hit = _first_nonzero(row)
    if hit is not None:
        return ZeronessVerdict.nonzero_at(hit, row[hit])
    if cfg.backend is None:
        return ZeronessVerdict.zero_bounded(N)
    from .smt import BackendError, export_smt, run_backend

    try:
        answer = run_backend(export_smt(s), cfg.backend, cfg.timeout)
    except BackendError as exc:
        return ZeronessVerdict.unknown(f"backend failure: {exc}")
    if answer == "unsat":
        return ZeronessVerdict.zero_certified(cfg.backend)
    if answer == "sat":
        wide = eval_prefix(s, N * cfg.extend_factor)[0]
        hit = _first_nonzero(wide)
        if hit is not None:
            return ZeronessVerdict.nonzero_at(hit, wide[hit])
        return ZeronessVerdict.unknown(
            f"backend reported satisfiable but no nonzero index <= {N * cfg.extend_factor}"
        )
    return ZeronessVerdict.unknown(f"backend answered {answer!r}")


# ---------------------------------------------------------------------------
# file format


_INIT_RE = re.compile(r"^(\S+)\(0\)\s*=\s*(-?\d+(?:/\d+)?)$")
_RECUR_RE = re.compile(r"^(\S+)'\s*=\s*(.*)$")


def _parse_rational(text: str) -> Fraction:
    return Fraction(text)


def _split_terms(text: str) -> list[tuple[int, str]]:
    """Split a polynomial into (sign, term) pairs on top-level + and -."""
    out = []
    sign, buf = 1, []
    for ch in text:
        if ch in "+-":
            if "".join(buf).strip():
                out.append((sign, "".join(buf).strip()))
            sign = 1 if ch == "+" else -1
            buf = []
        else:
            buf.append(ch)
    last = "".join(buf).strip()
    if last:
        out.append((sign, last))
    return out


def parse_convrec(text: str) -> ConvRecSystem:
    """Parse the system file format, one variable per line:

        f1(0)=1; f1' = f1*f1
        f2(0)=1/2; f2' = 2*f1 + 3

    '*' means convolution; a bare rational is the constant sequence
    c,0,0,...  Blank lines and '#' comments are ignored."""
    entries: list[tuple[str, Fraction, str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ";" not in line:
            raise FormatError(f"line {lineno}: expected 'name(0)=value; name' = poly'")
        left, _, right = line.partition(";")
        m = _INIT_RE.match(left.strip())
        if not m:
            raise FormatError(f"line {lineno}: malformed initial value part {left.strip()!r}")
        name, init = m.group(1), _parse_rational(m.group(2))
        r = _RECUR_RE.match(right.strip())
        if not r or r.group(1) != name:
            raise FormatError(f"line {lineno}: recurrence must be for {name!r}")
        entries.append((name, init, r.group(2).strip(), lineno))
    if not entries:
        raise FormatError("empty system")
    index = {name: i for i, (name, _, _, _) in enumerate(entries)}
    if len(index) != len(entries):
        raise FormatError("duplicate variable definitions")
    polys = []
    for name, _, poly_text, lineno in entries:
        terms: dict[Monomial, Fraction] = {}
        if poly_text == "0":
            polys.append(ConvPolynomial.zero())
            continue
        for sign, term in _split_terms(poly_text):
            coef = Fraction(sign)
            mono: list[int] = []
            for factor in term.split("*"):
                factor = factor.strip()
                if not factor:
                    raise FormatError(f"line {lineno}: empty factor in {term!r}")
                if re.fullmatch(r"\d+(?:/\d+)?", factor):
                    coef *= _parse_rational(factor)
                elif factor in index:
                    mono.append(index[factor])
                else:
                    raise FormatError(f"line {lineno}: unknown variable {factor!r}")
            key = tuple(sorted(mono))
            terms[key] = terms.get(key, Fraction(0)) + coef
        polys.append(ConvPolynomial.from_dict(terms))
    return ConvRecSystem(
        tuple(e[0] for e in entries), tuple(e[1] for e in entries), tuple(polys)
    )


def _format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def print_convrec(s: ConvRecSystem) -> str:
    lines = []
    for name, init, poly in zip(s.names, s.initials, s.polys):
        if not poly.terms:
            rhs = "0"
        else:
            parts = []
            for mono, coef in poly.terms:
                factors = [s.names[i] for i in mono]
                mag = abs(coef)
                if mag != 1 or not factors:
                    factors = [_format_rational(mag)] + factors
                piece = "*".join(factors)
                if not parts:
                    parts.append(piece if coef > 0 else f"-{piece}")
                else:
                    parts.append(f"+ {piece}" if coef > 0 else f"- {piece}")
            rhs = " ".join(parts)
        lines.append(f"{name}(0)={_format_rational(init)}; {name}' = {rhs}")
    return "\n".join(lines) + "\n"
