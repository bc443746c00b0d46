"""Dense univariate polynomials over Q and real root isolation.

Coefficient lists are stored low degree first. Root isolation uses Sturm
sequences on the square-free part and bisection from the Cauchy bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .mpoly import MPoly, Var

Dense = list[Fraction]


def trim(p: Sequence[Fraction]) -> Dense:
    out = list(p)
    while out and out[-1] == 0:
        out.pop()
    return out


def deg(p: Sequence[Fraction]) -> int:
    return len(p) - 1


def peval(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def padd(a: Sequence[Fraction], b: Sequence[Fraction]) -> Dense:
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def pneg(a: Sequence[Fraction]) -> Dense:
    return [-c for c in a]


def pmul(a: Sequence[Fraction], b: Sequence[Fraction]) -> Dense:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim(out)


def pderiv(p: Sequence[Fraction]) -> Dense:
    return trim([i * p[i] for i in range(1, len(p))])


def pdivmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Dense, Dense]:
    b = trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = trim(a)
    if len(r) < len(b):
        return [], r
    q = [Fraction(0)] * (len(r) - len(b) + 1)
    lb = b[-1]
    while len(r) >= len(b):
        c = r[-1] / lb
        k = len(r) - len(b)
        q[k] = c
        for i, bc in enumerate(b):
            r[i + k] -= c * bc
        r = trim(r[:-1] if r[-1] == 0 else r)
    return trim(q), r


def pmonic(p: Sequence[Fraction]) -> Dense:
    p = trim(p)
    if not p:
        return []
    return [c / p[-1] for c in p]


def pgcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> Dense:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, pdivmod(a, b)[1]
    return pmonic(a)


def squarefree_part(p: Sequence[Fraction]) -> Dense:
    p = trim(p)
    if len(p) <= 1:
        return pmonic(p)
    g = pgcd(p, pderiv(p))
    return pmonic(pdivmod(p, g)[0])


def to_dense(p: MPoly) -> tuple[Var | None, Dense]:
    """Convert a polynomial in at most one variable to a dense list."""
    vs = p.variables
    if len(vs) > 1:
        raise ValueError(f"not univariate: variables {vs}")
    v = vs[0] if vs else None
    out: Dense = []
    for m, c in p.items():
        e = m[0][1] if m else 0
        while len(out) <= e:
            out.append(Fraction(0))
        out[e] += c
    return v, trim(out)


def from_dense(p: Sequence[Fraction], v: Var) -> MPoly:
    return MPoly({((((v, i),) if i else ())): c for i, c in enumerate(p) if c})


# Sturm machinery -----------------------------------------------------------


def sturm_sequence(p: Sequence[Fraction]) -> list[Dense]:
    p = trim(p)
    seq = [p, pderiv(p)]
    while seq[-1]:
        r = pdivmod(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append(pneg(r))
    return [s for s in seq if s]


def sign_variations(values: Sequence[Fraction]) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _variations_at(seq: list[Dense], x: Fraction) -> int:
    return sign_variations([peval(s, x) for s in seq])


def _variations_at_inf(seq: list[Dense], positive: bool) -> int:
    vals = []
    for s in seq:
        lead = s[-1]
        if not positive and deg(s) % 2:
            lead = -lead
        vals.append(lead)
    return sign_variations(vals)


def count_roots(p: Sequence[Fraction], a: Fraction | None, b: Fraction | None) -> int:
    """Number of distinct real roots in ``(a, b]``; ``None`` means infinity."""
    seq = sturm_sequence(p)
    va = _variations_at_inf(seq, False) if a is None else _variations_at(seq, a)
    vb = _variations_at_inf(seq, True) if b is None else _variations_at(seq, b)
    return va - vb


def cauchy_bound(p: Sequence[Fraction]) -> Fraction:
    p = trim(p)
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


@dataclass(frozen=True)
class Interval:
    """An interval with rational endpoints and per-endpoint openness.

    An isolating interval for a root is either open ``(lo, hi)`` or the
    degenerate closed interval ``[r, r]`` for an exact rational root.
    """

    lo: Fraction
    hi: Fraction
    lo_open: bool = True
    hi_open: bool = True

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval: {self.lo} > {self.hi}")

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: Fraction) -> bool:
        above = x > self.lo if self.lo_open else x >= self.lo
        below = x < self.hi if self.hi_open else x <= self.hi
        return above and below


def _isolate_dense(f: Dense) -> list[Interval]:
    seq = sturm_sequence(f)
    out: list[Interval] = []
    bound = cauchy_bound(f)

    def var(x: Fraction) -> int:
        return _variations_at(seq, x)

    stack = [(-bound, bound, var(-bound), var(bound))]
    found: list[Interval] = []
    while stack:
        a, b, va, vb = stack.pop()
        n = va - vb
        if n == 0:
            continue
        if n == 1:
            if peval(f, b) == 0:
                found.append(Interval(b, b, False, False))
            else:
                found.append(Interval(a, b))
            continue
        mid = (a + b) / 2
        vm = var(mid)
        stack.append((a, mid, va, vm))
        stack.append((mid, b, vm, vb))
    found.sort(key=lambda iv: (iv.lo, iv.hi))
    out.extend(found)
    return out


def isolate_real_roots(p: MPoly | Sequence[Fraction]) -> list[Interval]:
    """Isolating intervals for the distinct real roots of a univariate polynomial.

    Output is sorted increasingly; exact rational roots met during bisection
    come back as degenerate intervals.
    """
    dense = to_dense(p)[1] if isinstance(p, MPoly) else trim([Fraction(c) for c in p])
    if not dense:
        raise ValueError("cannot isolate roots of the zero polynomial")
    if len(dense) == 1:
        return []
    if len(dense) == 2:
        r = -dense[0] / dense[1]
        return [Interval(r, r, False, False)]
    return _isolate_dense(squarefree_part(dense))


def refine(p: Sequence[Fraction], iv: Interval, width: Fraction) -> Interval:
    """Bisect an isolating interval of ``p`` until it is at most ``width`` wide."""
    if iv.is_point:
        return iv
    f = squarefree_part(trim(p))
    seq = sturm_sequence(f)
    lo, hi = iv.lo, iv.hi
    while hi - lo > width:
        mid = (lo + hi) / 2
        if peval(f, mid) == 0:
            return Interval(mid, mid, False, False)
        if _variations_at(seq, lo) - _variations_at(seq, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return Interval(lo, hi)
