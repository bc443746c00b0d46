"""Sparse multivariate polynomials with exact rational coefficients.

Variables are pairs ``(i, j)`` of non-negative integers. In differential
contexts ``(i, j)`` stands for the jet variable d^j(x_i); in plain contexts it
is simply the coordinate ``y_{i,j}``. Pairs compare lexicographically, which
gives the single global variable order used everywhere in the package.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

Var = tuple[int, int]
Monomial = tuple[tuple[Var, int], ...]
Scalar = Union[int, Fraction]

ONE_MONO: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out: list[tuple[Var, int]] = []
    i = j = 0
    while i < len(a) and j < len(b):
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_key(m: Monomial) -> tuple:
    """Graded order key; larger key means larger monomial.

    Ties in total degree are broken by comparing exponents of the largest
    variables first.
    """
    return (_mono_degree(m), tuple(sorted(((v, e) for v, e in m), reverse=True)))


def _mono_divides(a: Monomial, b: Monomial) -> Monomial | None:
    """Return b / a if a divides b."""
    da = dict(a)
    out = []
    for v, e in b:
        k = e - da.pop(v, 0)
        if k < 0:
            return None
        if k:
            out.append((v, k))
    if da:
        return None
    return tuple(out)


def _coerce(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient {c!r}")


class MPoly:
    """An immutable sparse polynomial over Q.

    ``terms`` maps monomials (sorted tuples of ``(var, exponent)``) to nonzero
    Fractions.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = _coerce(c)
                if c:
                    clean[m] = c
        self._terms = clean
        self._hash: int | None = None

    # constructors ---------------------------------------------------------

    @classmethod
    def const(cls, c: Scalar) -> MPoly:
        return cls({ONE_MONO: c})

    @classmethod
    def var(cls, v: Var, power: int = 1) -> MPoly:
        if power == 0:
            return cls.const(1)
        return cls({((tuple(v), power),): 1})

    @classmethod
    def _raw(cls, terms: dict[Monomial, Fraction]) -> MPoly:
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    # basic accessors ------------------------------------------------------

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == ONE_MONO for m in self._terms)

    def constant_value(self) -> Fraction:
        """The constant coefficient (0 if absent)."""
        return self._terms.get(ONE_MONO, Fraction(0))

    @property
    def variables(self) -> tuple[Var, ...]:
        vs = {v for m in self._terms for v, _ in m}
        return tuple(sorted(vs))

    def exponent_vectors(self) -> tuple[tuple[Var, ...], dict[tuple[int, ...], Fraction]]:
        """Dense exponent-vector view over the occurring variables."""
        vs = self.variables
        idx = {v: k for k, v in enumerate(vs)}
        out = {}
        for m, c in self._terms.items():
            vec = [0] * len(vs)
            for v, e in m:
                vec[idx[v]] = e
            out[tuple(vec)] = c
        return vs, out

    def degree(self, v: Var) -> int:
        """Degree in ``v``; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max((dict(m).get(v, 0) for m in self._terms), default=0)

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(_mono_degree(m) for m in self._terms)

    def leading_monomial(self) -> Monomial:
        return max(self._terms, key=mono_key)

    def leading_coefficient(self) -> Fraction:
        return self._terms[self.leading_monomial()]

    # arithmetic -----------------------------------------------------------

    @staticmethod
    def _lift(other) -> MPoly:
        if isinstance(other, MPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return MPoly.const(other)
        return NotImplemented

    def __add__(self, other) -> MPoly:
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return MPoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> MPoly:
        return MPoly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> MPoly:
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> MPoly:
        return (-self) + other

    def __mul__(self, other) -> MPoly:
        if isinstance(other, (int, Fraction)):
            if not other:
                return MPoly()
            return MPoly._raw({m: c * other for m, c in self._terms.items()})
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return MPoly._raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> MPoly:
        if n < 0:
            raise ValueError("negative power")
        result = MPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c: Scalar) -> MPoly:
        return self * _coerce(c)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MPoly.const(other)
        if not isinstance(other, MPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # calculus and substitution ------------------------------------------

    def diff(self, v: Var) -> MPoly:
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            dm = dict(m)
            e = dm.get(v, 0)
            if not e:
                continue
            if e == 1:
                del dm[v]
            else:
                dm[v] = e - 1
            nm = tuple(sorted(dm.items()))
            out[nm] = out.get(nm, 0) + c * e
        return MPoly(out)

    def coeffs_in(self, v: Var) -> dict[int, MPoly]:
        """Coefficients as a polynomial in ``v``: {power: coefficient}."""
        buckets: dict[int, dict[Monomial, Fraction]] = {}
        for m, c in self._terms.items():
            e = 0
            rest = []
            for w, k in m:
                if w == v:
                    e = k
                else:
                    rest.append((w, k))
            buckets.setdefault(e, {})[tuple(rest)] = c
        return {e: MPoly._raw(t) for e, t in buckets.items()}

    def lc(self, v: Var) -> MPoly:
        """Leading coefficient with respect to ``v``."""
        if not self._terms:
            return MPoly()
        cs = self.coeffs_in(v)
        return cs[max(cs)]

    def subs(self, mapping: Mapping[Var, MPoly | Scalar]) -> MPoly:
        """Substitute polynomials (or scalars) for variables."""
        if not mapping:
            return self
        lifted = {v: self._lift(p) for v, p in mapping.items()}
        powers: dict[tuple[Var, int], MPoly] = {}
        out = MPoly()
        for m, c in self._terms.items():
            keep = []
            factor = MPoly.const(c)
            for v, e in m:
                if v in lifted:
                    key = (v, e)
                    if key not in powers:
                        powers[key] = lifted[v] ** e
                    factor = factor * powers[key]
                else:
                    keep.append((v, e))
            out = out + factor * MPoly._raw({tuple(keep): Fraction(1)})
        return out

    def partial_eval(self, point: Mapping[Var, Fraction]) -> MPoly:
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            keep = []
            for v, e in m:
                if v in point:
                    c = c * point[v] ** e
                else:
                    keep.append((v, e))
            if c:
                k = tuple(keep)
                s = out.get(k, 0) + c
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return MPoly._raw(out)

    def eval(self, point: Mapping[Var, object]):
        """Evaluate at a point assigning every occurring variable.

        Works for any value type supporting ``+``, ``*`` and ``**``.
        """
        total = 0
        for m, c in self._terms.items():
            t = c
            for v, e in m:
                try:
                    x = point[v]
                except KeyError:
                    raise KeyError(f"no value for variable {v}") from None
                t = t * (x if e == 1 else x**e)
            total = t + total
        return total

    def rename(self, fn: Callable[[Var], Var]) -> MPoly:
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            acc: dict[Var, int] = {}
            for v, e in m:
                w = fn(v)
                acc[w] = acc.get(w, 0) + e
            nm = tuple(sorted(acc.items()))
            s = out.get(nm, 0) + c
            if s:
                out[nm] = s
            else:
                out.pop(nm, None)
        return MPoly._raw(out)

    # division -------------------------------------------------------------

    def exact_div(self, other: MPoly) -> MPoly | None:
        """Return ``self / other`` if the division is exact, else None."""
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        lm = other.leading_monomial()
        lcoef = other._terms[lm]
        rem = self
        quot: dict[Monomial, Fraction] = {}
        while not rem.is_zero():
            rm = rem.leading_monomial()
            q = _mono_divides(lm, rm)
            if q is None:
                return None
            c = rem._terms[rm] / lcoef
            quot[q] = c
            rem = rem - MPoly._raw({q: c}) * other
        return MPoly(quot)

    def monic(self) -> MPoly:
        """Scale so that the leading coefficient (graded order) is 1."""
        if not self._terms:
            return self
        return self * (1 / self.leading_coefficient())

    def sort_key(self) -> tuple:
        """A total, deterministic order on polynomials."""
        return tuple(sorted(((mono_key(m), c) for m, c in self._terms.items()), reverse=True))

    def __repr__(self) -> str:
        return f"MPoly({self})"

    def __str__(self) -> str:
        from ..parsing import format_poly

        return format_poly(self, mode="plain")


def as_poly(x) -> MPoly:
    if isinstance(x, MPoly):
        return x
    return MPoly.const(x)


def prod(polys: Iterable[MPoly]) -> MPoly:
    out = MPoly.const(1)
    for p in polys:
        out = out * p
    return out


def pseudo_div(Q: MPoly, P: MPoly, v: Var) -> tuple[int, MPoly, MPoly]:
    """Pseudo-divide ``Q`` by ``P`` with respect to ``v``.

    Returns ``(ell, quot, rem)`` with ``lc_v(P)**ell * Q == quot*P + rem`` and
    ``deg_v(rem) < deg_v(P)``. Each reduction step multiplies by ``lc_v(P)``
    only when that coefficient differs from 1, so ``ell`` counts the scaling
    steps actually needed.
    """
    dp = P.degree(v)
    if dp <= 0:
        raise ValueError(f"degenerate divisor: degree {dp} in {v}")
    lead = P.lc(v)
    unit = lead == 1
    ell = 0
    quot = MPoly()
    rem = Q
    while not rem.is_zero():
        dr = rem.degree(v)
        if dr < dp:
            break
        lr = rem.lc(v)
        shift = MPoly.var(v, dr - dp)
        if unit:
            quot = quot + lr * shift
            rem = rem - lr * shift * P
        else:
            ell += 1
            quot = quot * lead + lr * shift
            rem = rem * lead - lr * shift * P
    return ell, quot, rem
