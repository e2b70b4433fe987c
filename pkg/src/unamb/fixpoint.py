"""Exact least-fixpoint evaluation for generating-function systems.

Everything is rational arithmetic.  The lower track keeps iterates below
the least fixpoint by construction (Kleene steps from zero, Newton steps
only when provably safe, and floor-rounding to dyadics, all of which
preserve y <= lfp for a monotone map).  Upper bounds come only from the
Knaster-Tarski pre-fixpoint test F(u) <= u, so a returned enclosure is a
proof, not a float estimate.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .convrec import GfSystem
from .intervals import DEFAULT_BITS, floor_dyadic

DIVERGENCE_CEILING = Fraction(1 << 64)


class SingularMatrixError(ArithmeticError):
    pass


class DivergenceError(ArithmeticError):
    """Iterates exceeded the ceiling: the system has no finite least
    fixpoint at this evaluation point (or it is astronomically large)."""


def solve_linear_exact(
    a: list[list[Fraction]], b: list[Fraction]
) -> list[Fraction]:
    """Solve a x = b by Gaussian elimination over the rationals."""
    n = len(a)
    m = [[Fraction(v) for v in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrixError(f"no pivot in column {col}")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * w for v, w in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def _invert_exact(a: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(a)
    m = [
        [Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
        for i, row in enumerate(a)
    ]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrixError(f"no pivot in column {col}")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * w for v, w in zip(m[r], m[col])]
    return [row[n:] for row in m]


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with smallest denominator (then numerator) in [lo, hi].
    Stern-Brocot descent; picks up exact algebraic-looking answers such
    as an lfp that happens to be a small rational."""
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_between(-hi, -lo)
    # 0 < lo <= hi: walk the continued fraction while the interval
    # stays inside one integer step
    parts: list[int] = []
    while True:
        fl = lo.numerator // lo.denominator
        if lo == fl or fl + 1 <= hi:
            parts.append(fl if lo == fl else fl + 1)
            break
        parts.append(fl)
        lo, hi = 1 / (hi - fl), 1 / (lo - fl)
    val = Fraction(parts[-1])
    for p in reversed(parts[:-1]):
        val = p + 1 / val
    return val


@dataclass(frozen=True)
class LfpResult:
    lower: tuple[Fraction, ...]
    upper: tuple[Fraction, ...] | None
    status: str  # "converged" | "unknown"
    iterations: int

    @property
    def certified(self) -> bool:
        return self.upper is not None


def _jacobian_at(gfs: GfSystem, y: list[Fraction]) -> list[list[Fraction]]:
    k = gfs.k
    jac = [[Fraction(0)] * k for _ in range(k)]
    for i, poly in enumerate(gfs.polys):
        for mono, coef in poly.terms:
            if not mono:
                continue
            for j, mult in Counter(mono).items():
                val = coef * mult
                rest = list(mono)
                rest.remove(j)
                for m in rest:
                    val *= y[m]
                jac[i][j] += gfs.x_star * val
    return jac


def _newton_step(gfs: GfSystem, y: list[Fraction], fy: list[Fraction]):
    """Guarded Newton proposal, or None when safety can't be shown.

    For a monotone polynomial map with y <= lfp and y <= F(y), the step
    y + (I-J)^{-1}(F(y)-y) stays <= lfp provided (I-J)^{-1} exists and is
    entrywise nonnegative (equivalently the spectral radius of J at y is
    below one).  Nonnegativity is checked on the explicit inverse; any
    failure falls back to a plain Kleene step."""
    k = gfs.k
    jac = _jacobian_at(gfs, y)
    lhs = [
        [Fraction(int(i == j)) - jac[i][j] for j in range(k)] for i in range(k)
    ]
    try:
        inv = _invert_exact(lhs)
    except SingularMatrixError:
        return None
    if any(v < 0 for row in inv for v in row):
        return None
    resid = [fy[i] - y[i] for i in range(k)]
    return [
        y[i] + sum(inv[i][j] * resid[j] for j in range(k)) for i in range(k)
    ]


def _try_upper(
    gfs: GfSystem,
    y: list[Fraction],
    tol: Fraction,
    moved: Fraction,
    cheap_only: bool = False,
) -> tuple[Fraction, ...] | None:
    """Candidate upper bounds within tol of the lower iterate, certified
    by F(u) <= u (so lfp <= u by Knaster-Tarski).

    Two adaptive windows scale with the last Kleene step: a bottom-anchored
    one whose simplest rational snaps onto components with exact rational
    values once the window is narrower than their denominator spacing, and
    an above-anchored one that clears the fixpoint on components with
    irrational values, where any point strictly above certifies.  The
    fixed-width candidates catch easy systems before the iterate is tight.
    Candidates are produced lazily; cheap_only keeps periodic probes on
    large systems from paying the per-component simplest-rational cost.
    """
    m = max(moved, tol / (1 << 80))

    def _candidates():
        if not cheap_only and 32 * m <= tol:
            yield [simplest_between(v, v + 8 * m) for v in y]
            yield [simplest_between(v + 16 * m, v + 32 * m) for v in y]
        if not cheap_only:
            yield [simplest_between(v, v + tol) for v in y]
        yield [v + tol for v in y]
        yield list(y)

    for u in _candidates():
        fu = gfs.apply(u)
        if all(fu[i] <= u[i] for i in range(gfs.k)):
            return tuple(u)
    return None


def lfp_eval(
    gfs: GfSystem,
    tol: Fraction = Fraction(1, 1 << 60),
    max_iter: int = 2000,
    newton_max_k: int = 128,
    bits: int = DEFAULT_BITS,
) -> LfpResult:
    """Enclose the least fixpoint of y = initials + x*.p(y).

    Returns exact rational lower/upper vectors with upper - lower <= tol
    componentwise on success; status "unknown" leaves upper as None but
    the lower bound is still sound."""
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    k = gfs.k
    y: list[Fraction] = [Fraction(0)] * k
    use_newton = k <= newton_max_k
    iterations = 0
    moved = tol
    next_full = 0
    for iterations in range(1, max_iter + 1):
        fy = gfs.apply(y)
        if fy == y:
            return LfpResult(tuple(y), tuple(y), "converged", iterations)
        proposal = None
        if use_newton and all(fy[i] >= y[i] for i in range(k)):
            proposal = _newton_step(gfs, y, fy)
        new = proposal if proposal is not None else fy
        new = [floor_dyadic(max(v, y[i]), bits) for i, v in enumerate(new)]
        if any(v > DIVERGENCE_CEILING for v in new):
            raise DivergenceError(
                f"iterate exceeded {float(DIVERGENCE_CEILING):.3g} after "
                f"{iterations} steps; no finite least fixpoint reachable"
            )
        moved = max(abs(new[i] - y[i]) for i in range(k))
        y = new
        if moved < tol / 4 and iterations >= next_full:
            # full attempt, with backoff so a stubborn system is not
            # re-probed with the expensive candidates every iteration
            upper = _try_upper(gfs, y, tol, moved)
            if upper is not None:
                return LfpResult(tuple(y), upper, "converged", iterations)
            next_full = iterations + 8
        elif iterations % 32 == 0:
            upper = _try_upper(gfs, y, tol, moved, cheap_only=True)
            if upper is not None:
                return LfpResult(tuple(y), upper, "converged", iterations)
    upper = _try_upper(gfs, y, tol, moved)
    if upper is not None:
        return LfpResult(tuple(y), upper, "converged", iterations)
    return LfpResult(tuple(y), None, "unknown", iterations)
