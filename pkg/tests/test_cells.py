from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltacore.cells import (
    CellCertificate,
    DeltaCellCertificate,
    check_cell,
    check_delta_cell,
    check_fiber_density,
    check_subcell,
    decompose_1d,
    delta_decompose_1var,
    verify_decomposition_1d,
)
from deltacore.logic import conj, disj, evaluate
from deltacore.oracle import SampleConfig, sets_equal_sampled
from deltacore.parsing import parse_formula
from deltacore.suites import enlarge

F = parse_formula
CFG = SampleConfig(count=120)
PLANE = ((0, 0), (0, 1))
X = (0, 0)


def at(x):
    return {X: Fraction(x)}


def parabola():
    return CellCertificate(F("y1 = y0^2"), 1, (0,), "graph", PLANE)


def circle(mult=2):
    return CellCertificate(F("y0^2 + y1^2 = 1"), 1, (0,), "graph", PLANE, mult=mult)


# one-dimensional decomposition

def test_decompose_open_interval():
    [c] = decompose_1d(F("y0^2 < 2"))
    assert (c.kind, c.dim) == ("open", 1)
    assert evaluate(c.set, at("1.41")) and not evaluate(c.set, at("1.42"))
    assert evaluate(c.set, at("-1.41")) and not evaluate(c.set, at("-1.42"))


def test_decompose_finite_set():
    [c] = decompose_1d(F("y0^2 = 2"))
    assert c.dim == 0
    assert sets_equal_sampled(c.set, F("y0^2 = 2"), CFG).passed


def test_decompose_three_intervals_left_to_right():
    cells = decompose_1d(F("(y0^2 - 1)*(y0^2 - 4) > 0"))
    assert [c.kind for c in cells] == ["open"] * 3
    for c, x in zip(cells, (-3, 0, 3)):
        assert evaluate(c.set, at(x))
    assert verify_decomposition_1d(F("(y0^2 - 1)*(y0^2 - 4) > 0"), cells).passed


def test_decompose_empty_and_full():
    assert decompose_1d(F("y0^2 < -1")) == []
    [c] = decompose_1d(F("y0^2 + 1 > 0"))
    assert c.kind == "open"


roots = st.lists(st.integers(-4, 4), min_size=1, max_size=3)


@settings(max_examples=30, deadline=None)
@given(roots, st.sampled_from([">", "=", "!="]))
def test_decomposition_is_a_partition(rs, rel):
    poly = "*".join(f"(y0 - {r})" for r in rs)
    phi = F(f"{poly} {rel} 0")
    cells = decompose_1d(phi)
    assert verify_decomposition_1d(phi, cells).passed
    for x in [Fraction(k, 4) for k in range(-20, 21)]:
        hits = sum(evaluate(c.set, at(x)) for c in cells)
        assert hits == int(evaluate(phi, at(x)))


# certificates

def test_certificate_invariants():
    with pytest.raises(ValueError):
        CellCertificate(F("y0 > 0"), 2, (1, 0), "open", PLANE)
    with pytest.raises(ValueError):
        CellCertificate(F("y0 > 0"), 2, (0,), "open", PLANE)
    with pytest.raises(ValueError):
        CellCertificate(F("y0 > 0"), 1, (0,), "open-fiber", PLANE)
    with pytest.raises(ValueError):
        CellCertificate(F("y0 > 0"), 1, (0,), "blob", PLANE)


def test_check_cell_examples():
    assert check_cell(parabola(), CFG).passed
    v = check_cell(circle(), CFG)
    assert v.passed and any("boundary" in w.get("note", "") for w in v.witnesses)
    assert check_cell(circle(3), CFG).failed


def test_check_subcell():
    sub = check_subcell(circle(), F("y0 > -1/2 & 1/2 - y0 > 0"))
    assert check_cell(sub, CFG).passed
    assert check_subcell(circle(), F("true")) is not None
    with pytest.raises(ValueError, match="empty cell"):
        check_subcell(circle(), F("y0^2 < 0"))
    with pytest.raises(ValueError):
        check_subcell(circle(), F("y1 > 0"))


def test_fiber_density_examples():
    V = {(0, 1): (Fraction(9, 10), Fraction(11, 10))}
    v = check_fiber_density(parabola(), {X: 1, (0, 1): 1}, V, CFG)
    assert v.passed and Fraction(v.stats["u"]) == Fraction(25, 512)
    assert check_fiber_density(circle(), {X: 0, (0, 1): 1}, V, CFG).passed
    point = CellCertificate(F("y0 = 0 & y1 = 0"), 0, (), "graph", PLANE)
    assert check_fiber_density(point, {X: 0, (0, 1): 0}, {(0, 1): (Fraction(-1), Fraction(1))}, CFG).passed
    with pytest.raises(ValueError):
        check_fiber_density(parabola(), {X: 1, (0, 1): 2}, V, CFG)


def test_cell_json_round_trip():
    [c] = decompose_1d(F("y0^2 < 2"))
    back = CellCertificate.from_json(json.loads(json.dumps(c.to_json())))
    assert back.to_json() == c.to_json()


# delta-cells

@pytest.mark.parametrize("src,count", [("d(x0) > 0", 1), ("d(x0) = x0^2", 1), ("d(x0) = x0^2 | x0 > 3", 2), ("x0 > 0", 1)])
def test_delta_decompose(src, count):
    cells = delta_decompose_1var(F(src))
    assert len(cells) == count
    assert all(check_delta_cell(D, CFG).passed for D in cells)
    # only containment is sampled: jets like (3, 9) on the curve pinned at a
    # constant are not jets of differential points and are rightly dropped
    union = disj(*(D.set for D in cells))
    assert sets_equal_sampled(conj(union, F(src)), union, CFG).passed


def test_enlarged_target_fails():
    [D] = delta_decompose_1var(F("d(x0) = x0^2"))
    assert check_delta_cell(enlarge(D), CFG).failed


def test_delta_cell_round_trip():
    [D] = delta_decompose_1var(F("d(x0) = x0^2"))
    assert DeltaCellCertificate.from_json(D.to_json()).to_json() == D.to_json()


def test_delta_cell_depth_precondition():
    [D] = delta_decompose_1var(F("d(x0) > 0"))
    bad = DeltaCellCertificate(F("d^3(x0) > 0"), D.depth, D.target_cell)
    with pytest.raises(ValueError):
        check_delta_cell(bad, CFG)
