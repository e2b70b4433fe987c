"""Certified rational intervals with directed rounding.

Endpoints are exact rationals.  To keep denominators from exploding in
iterative computations, endpoints can be rounded to dyadics with a fixed
bit budget: lower endpoints round down, upper endpoints round up, so the
enclosure property is never lost.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

DEFAULT_BITS = 512


def floor_dyadic(x: Fraction, bits: int = DEFAULT_BITS) -> Fraction:
    """Largest multiple of 2^-bits that is <= x."""
    scale = 1 << bits
    return Fraction((x.numerator * scale) // x.denominator, scale)


def ceil_dyadic(x: Fraction, bits: int = DEFAULT_BITS) -> Fraction:
    scale = 1 << bits
    return Fraction(-((-x.numerator * scale) // x.denominator), scale)


@dataclass(frozen=True)
class IntervalRational:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x: Fraction) -> IntervalRational:
        x = Fraction(x)
        return IntervalRational(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: IntervalRational) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other: IntervalRational) -> IntervalRational:
        return IntervalRational(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: IntervalRational) -> IntervalRational:
        return IntervalRational(self.lo - other.hi, self.hi - other.lo)

    def scale(self, c: Fraction) -> IntervalRational:
        c = Fraction(c)
        if c >= 0:
            return IntervalRational(self.lo * c, self.hi * c)
        return IntervalRational(self.hi * c, self.lo * c)

    def rounded(self, bits: int = DEFAULT_BITS) -> IntervalRational:
        """Outward rounding to dyadic endpoints with the given bit budget."""
        return IntervalRational(floor_dyadic(self.lo, bits), ceil_dyadic(self.hi, bits))

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def sqrt_interval(x: Fraction | int, bits: int = 256) -> IntervalRational:
    """Enclosure of sqrt(x) with 2^-bits precision; exact point interval
    when x is a perfect square of a rational with small denominator."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("square root of a negative value")
    if x == 0:
        return IntervalRational.point(Fraction(0))
    p, q = x.numerator, x.denominator
    # sqrt(p/q) = sqrt(p*q)/q; floor(2^bits * sqrt(pq)) via integer isqrt
    scaled = (p * q) << (2 * bits)
    t = isqrt(scaled)
    if t * t == scaled:
        return IntervalRational.point(Fraction(t, q << bits))
    return IntervalRational(Fraction(t, q << bits), Fraction(t + 1, q << bits))
