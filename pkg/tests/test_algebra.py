from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltacore.algebra import Interval, MPoly, TruncSeries, hensel_lift, hensel_lift_steps, isolate_real_roots, pseudo_div
from deltacore.algebra.series import eval_series_poly
from deltacore.algebra.univariate import count_roots, peval, refine, to_dense

X, Y, Z = (0, 0), (1, 0), (2, 0)
x, y, z = MPoly.var(X), MPoly.var(Y), MPoly.var(Z)

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def polys(draw, max_deg=6, nv=3, max_terms=5):
    vs = [X, Y, Z][:nv]
    p = MPoly()
    for _ in range(draw(st.integers(0, max_terms))):
        mono = MPoly.const(draw(coeffs))
        for v in vs:
            mono = mono * MPoly.var(v, draw(st.integers(0, max_deg // nv)))
        p = p + mono
    return p


# pseudo-division

def test_pseudo_div_examples():
    assert pseudo_div(x**2, 2 * x - 1, X) == (2, 2 * x + 1, MPoly.const(1))
    assert pseudo_div(x, x, X) == (0, MPoly.const(1), MPoly())
    assert pseudo_div(y, x**2 + 1, X) == (0, MPoly(), y)


def test_pseudo_div_rejects_constant_divisor():
    with pytest.raises(ValueError):
        pseudo_div(x, y + 1, X)


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_pseudo_div_identity(Q, P):
    if P.degree(X) < 1:
        P = P * x**2 + x
    ell, quot, rem = pseudo_div(Q, P, X)
    assert P.lc(X) ** ell * Q == quot * P + rem
    assert rem.is_zero() or rem.degree(X) < P.degree(X)


@settings(max_examples=60, deadline=None)
@given(polys(max_terms=3), polys(max_terms=3), polys(max_terms=3))
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a - a == MPoly()


def test_no_zero_coefficients_stored():
    p = x + y - x
    assert p == y and all(c != 0 for c in p.terms.values())


# real roots

def test_isolate_examples():
    two = isolate_real_roots(x**2 - 2)
    assert len(two) == 2 and two[0].hi <= two[1].lo
    assert two[0].contains(Fraction(-141, 100)) and two[1].contains(Fraction(141, 100))
    assert isolate_real_roots(x**2 + 1) == []
    three = isolate_real_roots(x * (x - 1) * (x - 2))
    assert len(three) == 3
    assert [iv.contains(Fraction(r)) for iv, r in zip(three, (0, 1, 2))] == [True] * 3


def test_isolate_zero_polynomial_is_an_error():
    with pytest.raises(ValueError):
        isolate_real_roots(MPoly())


def test_linear_root_is_exact():
    [iv] = isolate_real_roots(3 * x - 1)
    assert iv == Interval(Fraction(1, 3), Fraction(1, 3), False, False)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=3), min_size=1, max_size=4), st.integers(0, 2))
def test_isolation_matches_sturm_and_refines(roots, extra):
    p = MPoly.const(1)
    for r in roots:
        p = p * (x - r)
    p = p * (x**2 + extra + 1)
    ivs = isolate_real_roots(p)
    assert len(ivs) == len(set(roots)) == count_roots(to_dense(p)[1], None, None)
    for a, b in zip(ivs, ivs[1:]):
        assert a.hi <= b.lo
    dense = to_dense(p)[1]
    for iv in ivs:
        fine = refine(dense, iv, Fraction(1, 1000))
        assert fine.width <= Fraction(1, 1000)
        assert fine.is_point and peval(dense, fine.lo) == 0 or count_roots(dense, fine.lo, fine.hi) == 1


# Hensel lifting

def _x2_minus(c: TruncSeries):
    return [-c, TruncSeries.const(0, c.precision), TruncSeries.const(1, c.precision)]


def test_hensel_square_root_example():
    Q = _x2_minus(TruncSeries.from_list([1, 1], 4))
    c = hensel_lift(Q, 1, 4)
    assert c.coeffs == (1, Fraction(1, 2), Fraction(-1, 8), Fraction(1, 16))


def test_hensel_trivial_examples():
    t = TruncSeries.from_list([0, 1], 3)
    assert hensel_lift([-t, TruncSeries.const(1, 3)], 0, 3).coeffs == (0, 1, 0)
    Q = _x2_minus(TruncSeries.const(1, 5))
    assert hensel_lift(Q, 1, 5).coeffs == (1, 0, 0, 0, 0)


def test_hensel_precision_32_quadratic():
    Q = _x2_minus(TruncSeries.from_list([1, 1], 32))
    c, steps = hensel_lift_steps(Q, 1, 32)
    assert eval_series_poly(Q, c).is_zero()
    assert steps <= 6


def test_hensel_doubling_agrees_with_truncation():
    Q16 = _x2_minus(TruncSeries.from_list([1, 1], 16))
    Q32 = _x2_minus(TruncSeries.from_list([1, 1], 32))
    assert hensel_lift(Q32, 1, 32).truncate(16) == hensel_lift(Q16, 1, 16)


def test_hensel_rejects_singular_reduction():
    with pytest.raises(ValueError, match="separant vanishes"):
        hensel_lift(_x2_minus(TruncSeries.from_list([0, 1], 4)), 0, 4)
