from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltacore.algebra import MPoly
from deltacore.diffpoly import DiffPoly, order_in
from deltacore.logic import (
    FALSE,
    TRUE,
    conj,
    delta_nice_form,
    disj,
    eq,
    evaluate,
    goodform_decompose,
    gt,
    kolchin_decompose,
    lambda_formula,
    mk_Z,
    mk_Zcal,
    negate,
    normalize_L,
    star_transform,
    to_dnf,
)
from deltacore.logic.normal import separant_witness
from deltacore.oracle import SampleConfig, sets_equal_sampled
from deltacore.oracle.sampling import derivative_closure
from deltacore.parsing import (
    ParseError,
    format_formula,
    format_poly,
    formula_from_json,
    formula_to_json,
    parse_dpoly,
    parse_formula,
    parse_poly,
)

F = parse_formula
P = parse_poly
CFG = SampleConfig(count=300)


def text(f, scheme="y"):
    return format_formula(f, "plain", scheme)


def pieces(out):
    return [(tuple(format_poly(b, "plain", "y") for b in B), format_poly(S, "plain", "y")) for B, S in out]


def union_of(out):
    return disj(*(mk_Z(B, S) for B, S in out))


def closed(B, S=1, depth=2):
    """Zero set of ``B`` together with the derivatives of ``B`` that fit in ``depth`` jets."""
    return mk_Z([g for b in B for g in derivative_closure(b, depth)], S)


# constructors

def test_mk_Z_examples():
    assert text(mk_Z([P("y1^2 - y0")])) == "y1^2 - y0 = 0"
    assert text(mk_Z([], P("y0")), "x") == "x0 != 0"
    contradiction = mk_Z([P("y0"), P("y1")], P("2*y1"))
    assert not any(evaluate(contradiction, {(0, 0): a, (0, 1): b}) for a in range(-2, 3) for b in range(-2, 3))
    with pytest.raises(ValueError):
        mk_Z([P("y0")], 0)


def test_mk_Zcal_reads_jets():
    f = mk_Zcal([parse_dpoly("d(x0) - x0")], parse_dpoly("x0"))
    assert evaluate(f, {(0, 0): Fraction(2), (0, 1): Fraction(2)})
    assert not evaluate(f, {(0, 0): Fraction(0), (0, 1): Fraction(0)})


def test_negation_is_pushed_to_atoms():
    f = negate(F("y0 > 0 & y1 = 0"))
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            pt = {(0, 0): Fraction(a), (0, 1): Fraction(b)}
            assert evaluate(f, pt) == (not (a > 0 and b == 0))


# star transform and lambda formulas

def test_star_examples():
    assert star_transform(F("d^2(x0) > 0"))[1] == 2
    assert star_transform(F("x0 = 0"))[1] == 0
    f, m = star_transform(F("d(x0) = x0^2 & x0 > 1"))
    assert m == 1 and text(f) == "-y0^2 + y1 = 0 & y0 - 1 > 0"


def test_star_round_trip_is_identity():
    phi = F("d(x0)^2 = x0 | d^2(x1) > x0*x1")
    star, _ = star_transform(phi)
    assert format_formula(star, "delta") == format_formula(phi, "delta")


def test_lambda_examples():
    riccati = parse_dpoly("d(x0) - x0^2")
    assert text(lambda_formula(riccati, 1)) == "-y0^2 + y1 = 0 & -2*y1*y0 + y2 = 0"
    assert text(lambda_formula(riccati, 0)) == "-y0^2 + y1 = 0"
    two = lambda_formula(parse_dpoly("x0*d(x1) - 1"), 1)
    # the x-block is extended by one jet
    assert (0, 1) in {v for a in to_dnf(two)[0] for v in a.poly.variables}


def test_lambda_rejects_missing_variable():
    with pytest.raises(ValueError):
        lambda_formula(DiffPoly(MPoly.var((0, 0)), 2), 1)


# good form and nice forms

def test_goodform_examples():
    assert pieces(goodform_decompose([P("y1^2 - y0")], 1, (0, 1))) == [(("y1^2 - y0",), "2*y1"), (("y0", "y1"), "1")]
    assert pieces(goodform_decompose([P("y1 - y0")], 1, (0, 1))) == [(("y1 - y0",), "1")]
    assert pieces(goodform_decompose([], 1, (0, 1))) == [((), "1")]


def test_goodform_terminates_when_initial_is_an_equation():
    out = goodform_decompose([P("y0*y1^2 - 1")], 1, (0, 1))
    assert sets_equal_sampled(union_of(out), F("y0*y1^2 - 1 = 0"), CFG).passed


def test_kolchin_examples():
    out = kolchin_decompose([parse_dpoly("d(x1)^2 - x0").poly], 1, 1)
    assert [(len(B), format_poly(S, "delta")) for B, S in out] == [(1, "2*d(x1)"), (2, "1")]
    assert len(kolchin_decompose([parse_dpoly("d(x0) - x0").poly], 1, 0)) == 1
    # y^2 = 0 and y*dy = 1 have no common zero
    assert kolchin_decompose([P("y0^2"), P("y1*y0 - 1")], 1, 0) == []


def test_normalize_examples():
    out = normalize_L(F("(y0 > 0 & y0^2 = 1) | y0 < -2"))
    assert [(tuple(map(format_poly, nd.equations)), format_poly(nd.side)) for nd in out] == [(("x0^2 - 1",), "2*x0"), ((), "1")]
    assert len(normalize_L(F("y1^2 = y0"))) == 2
    [single] = normalize_L(F("y0 > 0"))
    assert single.equations == ()


def test_delta_nice_form_examples():
    two = delta_nice_form(F("d(x1)^2 = x0 & x0 > 0"))
    assert len(two) == 2 and all(format_formula(nd.open_part, "delta") == "x0 > 0" for nd in two)
    assert len(delta_nice_form(F("d(x0) = x0"))) == 1
    [open_] = delta_nice_form(F("d(x0) > x0"))
    assert open_.equations == ()


def _check_good_form(out, y):
    for B, S in out:
        hits = [b for b in B if (order_in(b, y) >= 0 if isinstance(y, int) else b.degree(y) > 0)]
        assert len(hits) <= 1
        if hits:
            assert separant_witness(B, S, y) is not None


small = st.lists(st.tuples(st.integers(-2, 2), st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=3)


def _poly(terms):
    p = MPoly()
    for c, a, b in terms:
        p = p + MPoly.const(c) * MPoly.var((0, 0), a) * MPoly.var((0, 1), b)
    return p


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=1, max_size=2), small)
def test_goodform_is_sound_and_in_good_form(eqs, side):
    A = [_poly(t) for t in eqs]
    R = _poly(side)
    if R.is_zero():
        R = MPoly.const(1)
    out = goodform_decompose(A, R, (0, 1))
    _check_good_form(out, (0, 1))
    assert not sets_equal_sampled(union_of(out), mk_Z(A, R), CFG).failed


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_kolchin_is_sound_and_in_good_form(seed):
    from deltacore.suites import random_dpoly

    rng = random.Random(seed)
    A = [random_dpoly(rng, nvars=1, order=1, degree=2, terms=3).poly for _ in range(rng.randint(1, 2))]
    out = kolchin_decompose(A, 1, 0)
    _check_good_form(out, 0)
    # truncated jets of the pieces stay inside those of A; the converse only
    # holds at jets of genuine differential points, so it is not sampled here
    left = disj(*(closed(B, S) for B, S in out))
    assert not sets_equal_sampled(conj(left, closed(A)), left, CFG).failed


# parsing

def test_parse_examples():
    assert order_in(parse_dpoly("d(x0) - x0^2"), 0) == 1
    mixed = parse_dpoly("d^2(x0)*x1 - 3")
    assert (order_in(mixed, 0), order_in(mixed, 1)) == (2, 0)
    with pytest.raises(ParseError) as info:
        parse_dpoly("d(x0 +")
    assert info.value.column == 7


@pytest.mark.parametrize(
    "src",
    ["d(x0) = x0^2 | x0 > 3", "d^2(x1)*x0 - 1/2 != 0 & (x0 > 0 | x1 = 0)", "true", "y0^2 + y1^2 - 1 > 0"],
)
def test_formula_round_trips(src):
    f = F(src)
    assert F(format_formula(f, "delta")) == f
    assert formula_from_json(formula_to_json(f)) == f


@settings(max_examples=60, deadline=None)
@given(st.lists(small, min_size=1, max_size=3), st.lists(st.sampled_from(["=", "!=", ">"]), min_size=3, max_size=3))
def test_print_parse_identity(ps, rels):
    atoms = [(_poly(t), r) for t, r in zip(ps, rels)]
    f = conj(*(eq(p) if r == "=" else (gt(p) if r == ">" else negate(eq(p))) for p, r in atoms))
    if f in (TRUE, FALSE):
        return
    assert F(format_formula(f, "delta")) == f
