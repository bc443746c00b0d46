"""Closed rational intervals with exact interval arithmetic.

Used to certify signs of polynomials over boxes: if the enclosure of
``p(box)`` excludes zero, ``p`` has that sign everywhere on the box.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .mpoly import MPoly, Var


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("inverted enclosure")

    @classmethod
    def point(cls, x) -> Enclosure:
        x = Fraction(x)
        return cls(x, x)

    @staticmethod
    def _lift(x) -> Enclosure:
        if isinstance(x, Enclosure):
            return x
        return Enclosure.point(x)

    def __add__(self, other) -> Enclosure:
        o = self._lift(other)
        return Enclosure(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self) -> Enclosure:
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other) -> Enclosure:
        return self + (-self._lift(other))

    def __rsub__(self, other) -> Enclosure:
        return self._lift(other) - self

    def __mul__(self, other) -> Enclosure:
        o = self._lift(other)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Enclosure(min(ps), max(ps))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Enclosure:
        if n == 0:
            return Enclosure.point(1)
        if n % 2 == 1 or self.lo >= 0:
            return Enclosure(min(self.lo**n, self.hi**n), max(self.lo**n, self.hi**n))
        if self.hi <= 0:
            return Enclosure(self.hi**n, self.lo**n)
        return Enclosure(Fraction(0), max(self.lo**n, self.hi**n))

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def sign(self) -> int | None:
        """+1/-1 if the enclosure is sign-definite, 0 if it is exactly {0}."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        return None

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def magnitude(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))


def enclose(p: MPoly, box: Mapping[Var, object]) -> Enclosure:
    """Interval enclosure of ``p`` over a box of Fractions and Enclosures."""
    lifted = {v: Enclosure._lift(x) for v, x in box.items()}
    acc = Enclosure.point(0)
    for m, c in p.items():
        t = Enclosure.point(c)
        for v, e in m:
            t = t * (lifted[v] ** e)
        acc = acc + t
    return acc
