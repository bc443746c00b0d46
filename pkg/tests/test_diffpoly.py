from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltacore.algebra import MPoly
from deltacore.diffpoly import (
    DiffPoly,
    derive,
    from_ordinary,
    in_IP,
    order_in,
    p_delta,
    prolong,
    prolongations,
    ritt_reduce,
    separant,
    to_ordinary,
)
from deltacore.parsing import parse_dpoly
from deltacore.suites import random_dpoly


def d(text: str) -> DiffPoly:
    return parse_dpoly(text)


def same(a: DiffPoly, b: DiffPoly) -> bool:
    return a.poly == b.poly


random_P = st.integers(0, 10**6).map(lambda s: random_dpoly(random.Random(s), nvars=2, order=2, degree=3, terms=4))


# orders, separants, derivation

def test_order_examples():
    P = d("d^2(x0)*x1 - 3")
    assert (order_in(P, 0), order_in(P, 1)) == (2, 0)
    assert order_in(d("5"), 0) == -1
    assert order_in(d("d(x0)^3 - x0"), 0) == 1


def test_separant_examples():
    assert same(separant(d("d(x0)^3 - x0")), d("3*d(x0)^2"))
    assert same(separant(d("d^2(x0) + x0*d(x0)")), d("1"))
    assert same(separant(d("x0*d(x1)^2")), d("2*x0*d(x1)"))


def test_separant_undefined():
    with pytest.raises(ValueError, match="undefined separant"):
        separant(DiffPoly(MPoly.var((0, 0)), 2))


def test_derive_examples():
    assert same(derive(d("x0*d(x0)")), d("d(x0)^2 + x0*d^2(x0)"))
    assert derive(d("7")).poly.is_zero()
    assert same(derive(d("x0^3")), d("3*x0^2*d(x0)"))


def test_p_delta_examples():
    assert same(p_delta(d("x0*d(x0)")), d("d(x0)^2"))
    assert same(p_delta(d("d(x0) - x0^2")), d("-2*x0*d(x0)"))
    assert p_delta(d("d(x0)")).poly.is_zero()


@settings(max_examples=120, deadline=None)
@given(random_P)
def test_derivative_splits_into_p_delta_and_separant(P):
    y = P.nvars - 1
    m = order_in(P, y)
    nxt = DiffPoly.jet(y, m + 1, P.nvars)
    assert same(derive(P), p_delta(P) + separant(P) * nxt)


@settings(max_examples=60, deadline=None)
@given(random_P)
def test_separant_commutes_with_star(P):
    m = max(order_in(P, i) for i in range(P.nvars))
    y = P.nvars - 1
    k = order_in(P, y)
    star = to_ordinary(P, m)
    assert to_ordinary(separant(P), m) == star.diff((y, k))


# prolongations

def test_prolong_examples():
    P = d("d(x0) - x0^2")
    f1, f2 = prolong(P, 1), prolong(P, 2)
    assert same(f1.numerator, d("2*x0*d(x0)")) and f1.sep_power == 1 and same(f1.separant_base, d("1"))
    assert same(f2.numerator, d("2*d(x0)^2 + 4*x0^2*d(x0)"))
    for i in (1, 2, 3):
        assert prolong(d("d(x0) - 1"), i).numerator.poly.is_zero()


def test_prolong_rejects_index_zero():
    with pytest.raises(ValueError):
        prolong(d("d(x0) - x0"), 0)


def test_first_prolongation_is_minus_p_delta():
    P = d("d(x0)^2 - x0*d(x0) + 3")
    f = prolong(P, 1)
    assert same(f.numerator, -p_delta(P)) and f.sep_power == 1


@settings(max_examples=50, deadline=None)
@given(random_P)
def test_prolongation_orders_never_exceed_the_bound(P):
    """The bound ord_y(Q_i) <= ord_y(P), ord_xj(Q_i) <= ord_xj(P) + i always holds; see the ledger for equality."""
    y = P.nvars - 1
    for i, f in enumerate(prolongations(P, 3), start=1):
        assert order_in(f.numerator, y) <= order_in(P, y)
        for j in range(P.nvars - 1):
            bound = order_in(P, j) + i if order_in(P, j) >= 0 else -1
            assert order_in(f.numerator, j) <= bound


def test_prolongation_can_drop_the_y_order():
    # the derivative of 6y + 3x + 4 no longer involves y at all
    P = d("6*x1 + 3*x0 + 4")
    Q1 = prolong(P, 1).numerator
    assert order_in(Q1, 1) == -1 and order_in(Q1, 0) == 1


@settings(max_examples=40, deadline=None)
@given(random_P)
def test_prolongation_ideal_identity(P):
    y = P.nvars - 1
    m = order_in(P, y)
    for i, f in enumerate(prolongations(P, 2), start=1):
        lhs = f.separant_base**f.sep_power * DiffPoly.jet(y, m + i, P.nvars) - f.numerator
        assert in_IP(lhs, P)


def test_prolongation_consistency_numerically():
    P = d("d(x0)^2 + x0^2 - 1")
    # a point with P = 0, s_P != 0
    pt = {(0, 0): Fraction(3, 5), (0, 1): Fraction(4, 5)}
    fs = prolongations(P, 3)
    for i, f in enumerate(fs, start=1):
        pt[(0, 1 + i)] = f.evaluate(pt)
    for k in range(4):
        assert derive(P, k).poly.eval(pt) == 0


# Ritt reduction

def test_ritt_examples():
    assert ritt_reduce(d("d^2(x0) - x0"), d("d(x0) - x0")).rem.poly.is_zero()
    assert same(ritt_reduce(d("d^2(x0)"), d("d(x0) - x0")).rem, d("x0"))
    assert same(ritt_reduce(d("x0"), d("d(x0)")).rem, d("x0"))


def test_in_IP_examples():
    assert in_IP(d("d^2(x0) - x0"), d("d(x0) - x0"))
    assert not in_IP(d("x0"), d("d(x0) - x0"))
    P = d("d(x0)^2 - x0")
    assert in_IP(P, P)


def test_ritt_rejects_constant_divisor():
    with pytest.raises(ValueError):
        ritt_reduce(d("x0"), d("3"))


@settings(max_examples=60, deadline=None)
@given(random_P, random_P)
def test_ritt_trace_replays_and_lowers_rank(Q, P):
    n = max(Q.nvars, P.nvars)
    Q, P = DiffPoly(Q.poly, n), DiffPoly(P.poly, n)
    r = ritt_reduce(Q, P)
    assert r.verify()
    y = n - 1
    m = order_in(P, y)
    ro = order_in(r.rem, y)
    assert ro < m or (ro == m and r.rem.poly.degree((y, m)) < P.poly.degree((y, m)))


@settings(max_examples=40, deadline=None)
@given(random_P, random_P, st.integers(0, 2))
def test_ideal_membership_soundness(P, G, k):
    n = max(P.nvars, G.nvars)
    P, G = DiffPoly(P.poly, n), DiffPoly(G.poly, n)
    assert in_IP(separant(P) * derive(P, k) * G, P)


# ordinary form

def test_to_ordinary_examples():
    assert to_ordinary(d("d(x0) - x0^2"), 1) == MPoly.var((0, 1)) - MPoly.var((0, 0)) ** 2
    assert to_ordinary(d("3"), 0) == MPoly.const(3)
    with pytest.raises(ValueError):
        to_ordinary(d("d(x0)"), 0)


@settings(max_examples=60, deadline=None)
@given(random_P)
def test_ordinary_round_trip(P):
    m = max(order_in(P, i) for i in range(P.nvars))
    assert same(from_ordinary(to_ordinary(P, m), m, P.nvars), P)
