"""Exact rational enclosures."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .errors import SpecSyntaxError


def parse_rational(text) -> Fraction:
    """Parse ``p/q``, an integer, or a Fraction-like value."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecSyntaxError(f"not an exact rational: {text!r}") from exc


def fmt(x: Fraction) -> str:
    return str(Fraction(x))


@dataclass(frozen=True)
class MeasureInterval:
    """Closed interval ``[lo, hi]`` with rational endpoints.

    Measures satisfy ``0 <= lo``; centered correlations built from them may be
    negative, so only ``lo <= hi`` is enforced here.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "MeasureInterval":
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: "MeasureInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other):
        if isinstance(other, MeasureInterval):
            return MeasureInterval(self.lo + other.lo, self.hi + other.hi)
        return MeasureInterval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, MeasureInterval):
            return MeasureInterval(self.lo - other.hi, self.hi - other.lo)
        return MeasureInterval(self.lo - other, self.hi - other)

    def scale(self, c) -> "MeasureInterval":
        c = Fraction(c)
        if c >= 0:
            return MeasureInterval(self.lo * c, self.hi * c)
        return MeasureInterval(self.hi * c, self.lo * c)

    def abs(self) -> "MeasureInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return MeasureInterval(-self.hi, -self.lo)
        return MeasureInterval(0, max(-self.lo, self.hi))

    def clamp_nonneg(self) -> "MeasureInterval":
        return MeasureInterval(max(self.lo, 0), max(self.hi, 0))

    def sqrt(self, bits: int = 64) -> "MeasureInterval":
        """Outward-rounded square root of a nonnegative interval."""
        return MeasureInterval(sqrt_floor(max(self.lo, 0), bits), sqrt_ceil(max(self.hi, 0), bits))

    def __str__(self) -> str:
        return f"{fmt(self.lo)},{fmt(self.hi)}"


def sqrt_floor(x: Fraction, bits: int = 64) -> Fraction:
    """Rational lower bound for sqrt(x), within 2**-bits relative to the scale."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative value")
    scale = 1 << bits
    # sqrt(p/q) = sqrt(p*q)/q
    return Fraction(isqrt(x.numerator * x.denominator * scale * scale), x.denominator * scale)


def sqrt_ceil(x: Fraction, bits: int = 64) -> Fraction:
    x = Fraction(x)
    lo = sqrt_floor(x, bits)
    if lo * lo == x:
        return lo
    return lo + Fraction(1, x.denominator << bits)
