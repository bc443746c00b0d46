"""The differential polynomial ring Q{x_0, ..., x_n}.

A :class:`DiffPoly` is a polynomial in jet variables ``(i, j)`` standing for
d^j(x_i). The last variable ``x_n`` is the distinguished one: separants,
prolongations and Ritt reduction are taken with respect to it unless another
index is passed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .algebra.mpoly import MPoly, Var, pseudo_div


class DiffPoly:
    """A differential polynomial in ``nvars`` differential indeterminates."""

    __slots__ = ("poly", "nvars")

    def __init__(self, poly: MPoly | int | Fraction = 0, nvars: int | None = None):
        if not isinstance(poly, MPoly):
            poly = MPoly.const(poly)
        top = max((v[0] for v in poly.variables), default=-1) + 1
        if nvars is None:
            nvars = max(top, 1)
        elif nvars < top:
            raise ValueError(f"polynomial mentions x{top - 1} but nvars={nvars}")
        self.poly = poly
        self.nvars = nvars

    @classmethod
    def jet(cls, i: int, j: int = 0, nvars: int | None = None) -> DiffPoly:
        return cls(MPoly.var((i, j)), nvars if nvars is not None else i + 1)

    @classmethod
    def const(cls, c, nvars: int = 1) -> DiffPoly:
        return cls(MPoly.const(c), nvars)

    def _other(self, other) -> tuple[MPoly, int]:
        if isinstance(other, DiffPoly):
            return other.poly, max(self.nvars, other.nvars)
        if isinstance(other, MPoly):
            return other, self.nvars
        if isinstance(other, (int, Fraction)):
            return MPoly.const(other), self.nvars
        raise TypeError(f"cannot combine DiffPoly with {type(other).__name__}")

    def __add__(self, other) -> DiffPoly:
        p, n = self._other(other)
        return DiffPoly(self.poly + p, n)

    __radd__ = __add__

    def __sub__(self, other) -> DiffPoly:
        p, n = self._other(other)
        return DiffPoly(self.poly - p, n)

    def __rsub__(self, other) -> DiffPoly:
        p, n = self._other(other)
        return DiffPoly(p - self.poly, n)

    def __mul__(self, other) -> DiffPoly:
        p, n = self._other(other)
        return DiffPoly(self.poly * p, n)

    __rmul__ = __mul__

    def __neg__(self) -> DiffPoly:
        return DiffPoly(-self.poly, self.nvars)

    def __pow__(self, k: int) -> DiffPoly:
        return DiffPoly(self.poly**k, self.nvars)

    def __eq__(self, other) -> bool:
        if isinstance(other, DiffPoly):
            return self.poly == other.poly
        if isinstance(other, (MPoly, int, Fraction)):
            return self.poly == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.poly)

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def is_constant(self) -> bool:
        return self.poly.is_constant()

    def with_nvars(self, nvars: int) -> DiffPoly:
        return DiffPoly(self.poly, nvars)

    def __repr__(self) -> str:
        return f"DiffPoly({self})"

    def __str__(self) -> str:
        from .parsing import format_poly

        return format_poly(self.poly, mode="delta")


def _as_dp(P, nvars: int | None = None) -> DiffPoly:
    if isinstance(P, DiffPoly):
        return P
    return DiffPoly(P, nvars)


def order_in(P: DiffPoly | MPoly, i: int) -> int:
    """Largest ``j`` with d^j(x_i) occurring in ``P``; -1 if none."""
    poly = P.poly if isinstance(P, DiffPoly) else P
    return max((v[1] for v in poly.variables if v[0] == i), default=-1)


def order_of_set(polys: Iterable[DiffPoly | MPoly], i: int) -> int:
    return max((order_in(p, i) for p in polys), default=-1)


def _dvar(P: DiffPoly, y: int | None) -> int:
    return P.nvars - 1 if y is None else y


def leader(P: DiffPoly, y: int | None = None) -> Var:
    """The highest jet of the distinguished variable occurring in ``P``."""
    y = _dvar(P, y)
    m = order_in(P, y)
    if m < 0:
        raise ValueError(f"undefined separant: x{y} does not occur in {P}")
    return (y, m)


def separant(P: DiffPoly, y: int | None = None) -> DiffPoly:
    """Partial derivative of ``P`` with respect to its leader."""
    return DiffPoly(P.poly.diff(leader(P, y)), P.nvars)


def initial(P: DiffPoly, y: int | None = None) -> DiffPoly:
    """Leading coefficient of ``P`` as a polynomial in its leader."""
    return DiffPoly(P.poly.lc(leader(P, y)), P.nvars)


def derive_poly(p: MPoly) -> MPoly:
    out = MPoly()
    for v in p.variables:
        out = out + p.diff(v) * MPoly.var((v[0], v[1] + 1))
    return out


def derive(P: DiffPoly, times: int = 1) -> DiffPoly:
    """Apply the derivation (Leibniz rule, constants of Q map to 0)."""
    p = P.poly
    for _ in range(times):
        p = derive_poly(p)
    return DiffPoly(p, P.nvars)


def p_delta(P: DiffPoly, y: int | None = None) -> DiffPoly:
    """Differentiate only the coefficients of ``P`` viewed as a polynomial in its leader."""
    u = leader(P, y)
    out = MPoly()
    for k, c in P.poly.coeffs_in(u).items():
        out = out + derive_poly(c) * MPoly.var(u, k)
    return DiffPoly(out, P.nvars)


@dataclass(frozen=True)
class RatDiffFun:
    """The rational differential function ``numerator / separant_base**sep_power``."""

    numerator: DiffPoly
    separant_base: DiffPoly
    sep_power: int

    def __post_init__(self):
        if self.sep_power < 1:
            raise ValueError("sep_power must be at least 1")

    def evaluate(self, point: Mapping[Var, Fraction]) -> Fraction:
        den = self.separant_base.poly.eval(point) ** self.sep_power
        if den == 0:
            raise ZeroDivisionError("separant vanishes at the point")
        return Fraction(self.numerator.poly.eval(point)) / den


def prolongations(P: DiffPoly, d: int, y: int | None = None) -> list[RatDiffFun]:
    """The first ``d`` rational prolongations f_1, ..., f_d along ``P``.

    ``f_i`` expresses d^(m+i)(y) on the locus ``P = 0, s_P != 0`` in terms of
    jets of ``y`` of order at most ``m``.
    """
    y = _dvar(P, y)
    u = leader(P, y)
    nxt = (y, u[1] + 1)
    s = separant(P, y).poly
    s_is_const = s.is_constant()
    q1 = -p_delta(P, y).poly
    out: list[RatDiffFun] = []
    ds = derive_poly(s)
    c_s, d_s = _split_linear(ds, nxt)
    q, ell = q1, 1
    for i in range(1, d + 1):
        if i > 1:
            a, b = _split_linear(derive_poly(q), nxt)
            q = s * (a * s + b * q1) - q * (c_s * s + d_s * q1) * ell
            ell += 2
            if s_is_const:
                q = q * (s.constant_value() ** -(ell - 1))
                ell = 1
            else:
                while ell > 1:
                    red = q.exact_div(s)
                    if red is None:
                        break
                    q, ell = red, ell - 1
        out.append(RatDiffFun(DiffPoly(q, P.nvars), DiffPoly(s, P.nvars), ell))
    return out


def _split_linear(p: MPoly, v: Var) -> tuple[MPoly, MPoly]:
    """Write ``p = a + b*v`` where ``p`` has degree at most one in ``v``."""
    cs = p.coeffs_in(v)
    if any(k > 1 for k in cs):
        raise AssertionError(f"expected degree <= 1 in {v}")
    return cs.get(0, MPoly()), cs.get(1, MPoly())


def prolong(P: DiffPoly, i: int, y: int | None = None) -> RatDiffFun:
    """The ``i``-th rational prolongation along ``P``."""
    if i < 1:
        raise ValueError("prolongation index must be at least 1")
    return prolongations(P, i, y)[-1]


@dataclass
class RittStep:
    derivative: int  # k: the divisor was d^k(P)
    variable: Var
    power: int


@dataclass
class Reduction:
    """Result of reducing ``Q`` modulo the differential ideal of ``P``.

    ``multiplier * Q - rem == sum(cofactors[k] * d^k(P))`` where
    ``multiplier = separant**sep_power * initial**init_power``.
    """

    sep_power: int
    init_power: int
    rem: DiffPoly
    source: DiffPoly
    divisor: DiffPoly
    y: int
    trace: list[RittStep] = field(default_factory=list)
    cofactors: dict[int, MPoly] = field(default_factory=dict)

    def __iter__(self):
        return iter((self.sep_power, self.init_power, self.rem))

    def multiplier(self) -> MPoly:
        s = separant(self.divisor, self.y).poly
        i = initial(self.divisor, self.y).poly
        return s**self.sep_power * i**self.init_power

    def verify(self) -> bool:
        """Replay the trace: check the ideal-membership identity by expansion."""
        lhs = self.multiplier() * self.source.poly - self.rem.poly
        rhs = MPoly()
        dp = self.divisor.poly
        for k in range(max(self.cofactors, default=-1) + 1):
            if k in self.cofactors:
                rhs = rhs + self.cofactors[k] * dp
            dp = derive_poly(dp)
        return lhs == rhs


def ritt_reduce(Q: DiffPoly, P: DiffPoly, y: int | None = None) -> Reduction:
    """Ritt reduction of ``Q`` by the single differential polynomial ``P``.

    Higher jets of the distinguished variable are removed first by
    pseudo-division by d^k(P) (leading coefficient s_P), then the degree in
    the leader of ``P`` is lowered by pseudo-division by ``P`` itself.
    """
    y = _dvar(P, y)
    Q = _as_dp(Q, P.nvars)
    u = leader(P, y)
    m = u[1]
    sep_power = init_power = 0
    rem = Q.poly
    cof: dict[int, MPoly] = {}
    trace: list[RittStep] = []
    derivs = {0: P.poly}

    def absorb(ell: int, lead: MPoly, k: int, quot: MPoly) -> None:
        if ell:
            scale = lead**ell
            for key in cof:
                cof[key] = cof[key] * scale
        cof[k] = cof.get(k, MPoly()) + quot

    while True:
        k = order_in(rem, y)
        if k <= m:
            break
        shift = k - m
        while max(derivs) < shift:
            top = max(derivs)
            derivs[top + 1] = derive_poly(derivs[top])
        D = derivs[shift]
        v = (y, k)
        ell, quot, rem = pseudo_div(rem, D, v)
        absorb(ell, D.lc(v), shift, quot)
        sep_power += ell
        trace.append(RittStep(shift, v, ell))
    if order_in(rem, y) == m and rem.degree(u) >= P.poly.degree(u):
        ell, quot, rem = pseudo_div(rem, P.poly, u)
        absorb(ell, P.poly.lc(u), 0, quot)
        init_power += ell
        trace.append(RittStep(0, u, ell))
    cof = {k: c for k, c in cof.items() if not c.is_zero()}
    return Reduction(sep_power, init_power, DiffPoly(rem, max(P.nvars, Q.nvars)), Q, P, y, trace, cof)


def in_IP(Q: DiffPoly, P: DiffPoly, y: int | None = None) -> bool:
    """Whether Ritt reduction of ``Q`` by ``P`` leaves remainder zero."""
    return ritt_reduce(Q, P, y).rem.is_zero()


def to_ordinary(P: DiffPoly, m: int | Sequence[int]) -> MPoly:
    """The ordinary polynomial P* in block coordinates ``y_{i,j}``, j <= m.

    Jet ``(i, j)`` is sent to coordinate ``(i, j)`` of the block of ``x_i``;
    the call checks that every block is long enough.
    """
    depths = _depths(m, P.nvars)
    for i, j in P.poly.variables:
        if j > depths[i]:
            raise ValueError(f"block depth {depths[i]} too small for d^{j}(x{i})")
    return P.poly


def from_ordinary(p: MPoly, blocks: int | Sequence[int], nvars: int | None = None) -> DiffPoly:
    """Inverse of :func:`to_ordinary`: read block coordinates as jets."""
    n = nvars if nvars is not None else (len(blocks) if not isinstance(blocks, int) else None)
    dp = DiffPoly(p, n)
    depths = _depths(blocks, dp.nvars)
    for i, j in p.variables:
        if j > depths[i]:
            raise ValueError(f"coordinate y{i}_{j} lies outside block of depth {depths[i]}")
    return dp


def _depths(m: int | Sequence[int], nvars: int) -> list[int]:
    if isinstance(m, int):
        if m < 0:
            raise ValueError("depth must be non-negative")
        return [m] * nvars
    depths = list(m)
    if len(depths) < nvars:
        raise ValueError("not enough blocks")
    return depths
