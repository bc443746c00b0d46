from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltacore.envelope import (
    LinkedTriple,
    build_envelope,
    closure_projection_check,
    density_check,
    finiteness_bound,
    linked_triple_1var,
    preimage_check,
    project_block,
)
from deltacore.logic import disj, evaluate
from deltacore.oracle import JetPoint, SampleConfig
from deltacore.parsing import format_formula, parse_formula
from deltacore.suites import canonical_equations

F = parse_formula
CFG = SampleConfig(count=120)


def jets(*cs):
    return {(0, j): Fraction(c) for j, c in enumerate(cs)}


def test_riccati_envelope_matches_hand_derivation():
    E = build_envelope(F("d(x0) = x0^2"))
    assert (E.order, E.depth) == (1, 2)
    assert canonical_equations(E.target) == canonical_equations(F("y1 = y0^2 & y2 = 2*y0*y1"))
    assert evaluate(E.target, jets(2, 4, 16))
    assert not evaluate(E.target, jets(2, 4, 15))
    [cert] = E.certificates
    assert cert["case"] == "ii" and cert["prolongations"] == 1


def test_open_formula_is_its_own_envelope():
    E = build_envelope(F("d(x0) > x0"))
    assert E.certificates[0]["case"] == "i"
    assert format_formula(E.target, "plain", "y") == "y1 - y0 > 0"


@pytest.mark.parametrize("src", ["d(x0) = x0^2", "d(x0)^2 = x0 & x0 > 0", "d(x0) = x0^2 | x0 > 3", "x0*d(x1) = 1"])
def test_envelope_checks_pass(src):
    E = build_envelope(F(src))
    assert preimage_check(E, CFG).passed
    assert not density_check(E, CFG).failed


def test_to_json_fields():
    doc = build_envelope(F("d(x0) = x0^2")).to_json()
    assert set(doc) == {"source", "target", "order", "depth", "nvars", "certificates"}
    assert doc["depth"] == 2 * doc["order"]


# block projections

def test_project_block_examples():
    assert project_block(1, 2, (2, 4, 16)) == (2, 4)
    assert project_block(0, 2, [1, 2, 3, 4, 5, 6], 2) == (1, 4)
    assert project_block(1, 2, jets(2, 4, 16)) == jets(2, 4)
    assert project_block(1, 2, JetPoint((1, 2, 3), 1, 2)) == JetPoint((1, 2), 1, 1)


@pytest.mark.parametrize("args", [(3, 2, (1, 2, 3)), (1, 2, (1, 2, 3, 4)), (1, 3, JetPoint((1, 2, 3), 1, 2))])
def test_project_block_errors(args):
    with pytest.raises(ValueError):
        project_block(*args)


def test_project_block_on_formulas_is_a_renaming():
    f = F("y1 > y0")
    assert project_block(1, 2, f) == f
    with pytest.raises(ValueError):
        project_block(0, 2, f)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 3), st.integers(0, 5), st.data())
def test_project_block_composes(n, d, data):
    k = data.draw(st.integers(0, d))
    m = data.draw(st.integers(0, k))
    p = data.draw(st.lists(st.integers(-9, 9), min_size=n * (d + 1), max_size=n * (d + 1)))
    assert project_block(m, k, project_block(k, d, p, n), n) == project_block(m, d, p, n)


# linked triples and closures

def test_closure_projection_riccati():
    T = linked_triple_1var(F("d(x0) = x0^2"))
    assert T.m == 2
    assert closure_projection_check(T, 1, CFG).passed


def test_closure_projection_order_zero():
    T = linked_triple_1var(F("x0 > 0"))
    assert T.m == 0 and T.Z == T.X
    assert closure_projection_check(T, 0, CFG).passed


def test_closure_projection_catches_an_extra_component():
    T = linked_triple_1var(F("d(x0) = x0^2"))
    bad = LinkedTriple(T.X, disj(T.Z, F("y0 < -10")), T.m, 1, T.envelope)
    assert closure_projection_check(bad, 1, CFG).failed


def test_closure_projection_preconditions():
    T = linked_triple_1var(F("d(x0) = x0^2"))
    with pytest.raises(ValueError):
        closure_projection_check(T, 3, CFG)
    with pytest.raises(ValueError):
        closure_projection_check(T, 0, CFG)
    with pytest.raises(ValueError):
        linked_triple_1var(F("d(x1) = x0"))


# finiteness

def test_finiteness_examples():
    assert finiteness_bound(F("d(x1) = x0 & x1^3 = x0")) == 3
    assert finiteness_bound(F("x1^2 = x0")) == 2
    assert finiteness_bound(F("d(x0) > 0")) is None
    assert finiteness_bound(build_envelope(F("x1^2 = x0"))) == 2


def test_finiteness_is_subadditive():
    a, b = F("x1^2 = x0"), F("d(x1) = x0 & x1^3 = x0")
    assert finiteness_bound(disj(a, b)) <= finiteness_bound(a) + finiteness_bound(b)
