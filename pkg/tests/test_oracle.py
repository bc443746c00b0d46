from __future__ import annotations

import time
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltacore.oracle import (
    JetPoint,
    SampleConfig,
    combine,
    dimension_probe,
    dl_premise_check,
    eval_at,
    newton_regular_zero,
    sets_equal_sampled,
)
from deltacore.parsing import parse_dpoly, parse_formula, parse_poly

F, P = parse_formula, parse_poly
CFG = SampleConfig(count=120)
Y0, Y1 = (0, 0), (0, 1)


def test_eval_at_examples():
    riccati = parse_dpoly("d(x0) - x0^2")
    assert eval_at(riccati, JetPoint((Fraction(2), Fraction(4)), 1, 1)) == 0
    assert eval_at(riccati, {Y0: 2, Y1: 5}) == 1
    assert eval_at(F("d(x0) = x0^2"), {Y0: 2, Y1: 4}) is True
    with pytest.raises(ValueError, match="depth mismatch"):
        eval_at(riccati, JetPoint((Fraction(2),), 1, 0))


def test_jet_point_layout():
    p = JetPoint((1, 2, 3, 4), 2, 1)
    assert p.as_mapping() == {(0, 0): 1, (0, 1): 2, (1, 0): 3, (1, 1): 4}
    assert p[(1, 0)] == 3
    with pytest.raises(ValueError):
        JetPoint((1, 2, 3), 2, 1)


# Newton

def test_newton_circle():
    z = newton_regular_zero([P("y0^2 + y1^2 - 1")], {Y0: Fraction(1, 10), Y1: Fraction(9, 10)}, CFG, P("2*y1"))
    assert z is not None and z.point[Y0] == Fraction(1, 10)
    lo, hi = z.guard
    assert lo > 0 and abs(z.point[Y1] ** 2 + Fraction(1, 100) - 1) < Fraction(1, 10**9)


def test_newton_parabola_is_exact():
    z = newton_regular_zero([P("y1 - y0^2")], {Y0: Fraction(1), Y1: Fraction(9, 10)}, CFG)
    assert z.point == {Y0: 1, Y1: 1}


def test_newton_without_real_zero():
    assert newton_regular_zero([P("y0^2 + 1")], {Y0: Fraction(1)}, CFG) is None


def test_newton_needs_square_system():
    with pytest.raises(ValueError):
        newton_regular_zero([P("y0"), P("y1"), P("y0 + y1")], {Y0: 0, Y1: 0}, CFG)


# (DL) premise

def test_dl_premise_examples():
    for src, status, kind in [
        ("d(x0)^2 + x0^2 - 1", "pass", "regular-zero"),
        ("d(x0)^2 + x0^2 + 1", "fail", "interval-exclusion"),
        ("d(x0)^2", "fail", "separant-radical"),
    ]:
        t = time.perf_counter()
        v = dl_premise_check(parse_dpoly(src))
        assert time.perf_counter() - t < 2
        assert v.status == status and v.witnesses[0]["kind"] == kind


def test_dl_premise_requires_positive_order():
    with pytest.raises(ValueError):
        dl_premise_check(parse_dpoly("x0^2 - 1"))


# sampled set equality

def test_sets_equal_examples():
    v = sets_equal_sampled(F("y1^2 = y0"), F("y1^2 = y0 & 2*y1 != 0"), CFG)
    assert v.failed and v.witnesses[0]["point"] == {"0,0": "0", "0,1": "0"}
    v = sets_equal_sampled(F("y0 > 0"), F("y0 > 0 | y0 = 0"), CFG)
    assert v.failed and v.witnesses[0]["point"] == {"0,0": "0"}
    assert sets_equal_sampled(F("y0^2 < 1"), F("y0 > -1 & 1 > y0"), CFG).passed


def test_sampling_is_deterministic():
    a = sets_equal_sampled(F("y0^2 + y1^2 < 1"), F("y0^2 < 1"), CFG)
    b = sets_equal_sampled(F("y0^2 + y1^2 < 1"), F("y0^2 < 1"), CFG)
    assert a == b and a.failed
    c = sets_equal_sampled(F("y0^2 + y1^2 < 1"), F("y0^2 < 1"), CFG.with_(seed=1))
    assert c.failed


def test_combine_verdicts():
    ok = sets_equal_sampled(F("y0 > 0"), F("y0 > 0"), CFG)
    bad = sets_equal_sampled(F("y0 > 0"), F("y0 > 1"), CFG)
    assert combine([ok, ok]).passed and combine([ok, bad]).failed


# dimension

@pytest.mark.parametrize(
    "src,dim",
    [("y0^2 + y1^2 < 1", 2), ("y0^2 + y1^2 = 1", 1), ("y0 = 0 & y1 = 0", 0), ("y0^2 + y1^2 < -1", -1)],
)
def test_dimension_probe(src, dim):
    d, proj = dimension_probe(F(src), CFG)
    assert d == dim and len(proj) == max(dim, 0)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["y0^2 + y1^2 < 1", "y0 = y1", "y0 = 0 & y1 = 1", "y0 > 1"]), st.sampled_from(["y1 = 0", "y0 = 1 & y1 = 1"]))
def test_dimension_is_monotone_and_bounded(a, b):
    da = dimension_probe(F(a), CFG)[0]
    du = dimension_probe(F(f"{a} | {b}"), CFG)[0]
    assert da <= du <= 2
