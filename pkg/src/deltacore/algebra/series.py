"""Truncated power series in one variable ``t`` and Newton-Hensel lifting."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class TruncSeries:
    """A power series known modulo ``t**precision``."""

    coeffs: tuple[Fraction, ...]
    precision: int

    def __post_init__(self):
        if self.precision < 1:
            raise ValueError("precision must be positive")
        cs = tuple(Fraction(c) for c in self.coeffs[: self.precision])
        cs = cs + (Fraction(0),) * (self.precision - len(cs))
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def const(cls, c, precision: int) -> TruncSeries:
        return cls((Fraction(c),), precision)

    @classmethod
    def from_list(cls, cs: Sequence, precision: int | None = None) -> TruncSeries:
        return cls(tuple(cs), precision if precision is not None else max(len(cs), 1))

    def truncate(self, n: int) -> TruncSeries:
        if n > self.precision:
            raise ValueError(f"cannot raise precision from {self.precision} to {n}")
        return TruncSeries(self.coeffs[:n], n)

    def _align(self, other) -> tuple[TruncSeries, TruncSeries]:
        if not isinstance(other, TruncSeries):
            other = TruncSeries.const(other, self.precision)
        n = min(self.precision, other.precision)
        return self.truncate(n), other.truncate(n)

    def __add__(self, other) -> TruncSeries:
        a, b = self._align(other)
        return TruncSeries(tuple(x + y for x, y in zip(a.coeffs, b.coeffs)), a.precision)

    __radd__ = __add__

    def __neg__(self) -> TruncSeries:
        return TruncSeries(tuple(-c for c in self.coeffs), self.precision)

    def __sub__(self, other) -> TruncSeries:
        a, b = self._align(other)
        return a + (-b)

    def __rsub__(self, other) -> TruncSeries:
        return (-self) + other

    def __mul__(self, other) -> TruncSeries:
        a, b = self._align(other)
        n = a.precision
        out = [Fraction(0)] * n
        for i, x in enumerate(a.coeffs):
            if x:
                for j in range(n - i):
                    out[i + j] += x * b.coeffs[j]
        return TruncSeries(tuple(out), n)

    __rmul__ = __mul__

    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    def inverse(self) -> TruncSeries:
        if not self.is_unit():
            raise ZeroDivisionError("series with zero constant term is not invertible")
        n = self.precision
        inv = [Fraction(0)] * n
        inv[0] = 1 / self.coeffs[0]
        for k in range(1, n):
            s = sum(self.coeffs[j] * inv[k - j] for j in range(1, k + 1))
            inv[k] = -s * inv[0]
        return TruncSeries(tuple(inv), n)

    def __truediv__(self, other) -> TruncSeries:
        a, b = self._align(other)
        return a * b.inverse()

    def valuation(self) -> int | None:
        """Index of the first nonzero coefficient, None if zero mod t^N."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return None

    def is_zero(self) -> bool:
        return self.valuation() is None


SeriesPoly = Sequence[TruncSeries]
"""A polynomial in x with series coefficients, low degree first."""


def eval_series_poly(Q: SeriesPoly, c: TruncSeries) -> TruncSeries:
    acc = TruncSeries.const(0, c.precision)
    for coef in reversed(Q):
        acc = acc * c + coef
    return acc


def derivative(Q: SeriesPoly) -> list[TruncSeries]:
    return [Q[i] * i for i in range(1, len(Q))]


def hensel_lift_steps(Q: SeriesPoly, a0, N: int) -> tuple[TruncSeries, int]:
    """Newton lifting of a simple root of ``Q mod t``; returns (root, iterations).

    The precision doubles at each iteration, so ``ceil(log2 N)`` steps suffice.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if not Q:
        raise ValueError("zero polynomial")
    a0 = Fraction(a0)
    dQ = derivative(Q)
    c = TruncSeries.const(a0, 1)
    if not eval_series_poly([q.truncate(1) for q in Q], c).is_zero():
        raise ValueError("a0 is not a root of the reduction mod t")
    if not dQ or not eval_series_poly([q.truncate(1) for q in dQ], c).is_unit():
        raise ValueError("separant vanishes at reduction")
    prec = 1
    steps = 0
    while prec < N:
        prec = min(2 * prec, N)
        c = TruncSeries(c.coeffs, prec)
        Qp = [q.truncate(prec) for q in Q]
        dQp = [q.truncate(prec) for q in dQ]
        c = c - eval_series_poly(Qp, c) / eval_series_poly(dQp, c)
        steps += 1
    return c, steps


def hensel_lift(Q: SeriesPoly, a0, N: int) -> TruncSeries:
    """Root ``c`` of ``Q`` modulo ``t**N`` with ``c = a0 mod t``."""
    return hensel_lift_steps(Q, a0, N)[0]
