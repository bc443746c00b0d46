"""Acceptance criteria, one test each; a summary line per criterion is printed at the end of the run."""

from __future__ import annotations

import json
import time

import pytest

from conftest import ACCEPTANCE_LINES
from deltacore.diffpoly import in_IP
from deltacore.parsing import parse_dpoly
from deltacore.oracle import SampleConfig, dl_premise_check
from deltacore.suites import DL_CASES, SUITES, run_suite

SEED = 7
FIRST_RUN: dict[str, str] = {}


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def suite(name: str):
    t = time.perf_counter()
    rep = run_suite(name, seed=SEED)
    FIRST_RUN[name] = json.dumps(rep.to_json(), sort_keys=True)
    return rep, time.perf_counter() - t


def test_criterion_1_derivative_identity():
    rep, dt = suite("derive")
    ok = rep.cases == 300 and rep.failed == 0 and dt < 10
    report(1, ok, f"derivative identity {rep.passed}/{rep.cases} in {dt:.2f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="exact order equality is false in general (e.g. 6*y + 3*x + 4); see notes")
def test_criterion_2_prolongation_orders():
    rep, _ = suite("prolong")
    n = rep.notes
    report(
        2,
        rep.failed == 0,
        f"exact orders {rep.passed}/{rep.cases}; upper bound holds: {n['upper_bound_holds']}; "
        f"ideal identity holds: {n['identity_holds']}",
    )
    # the weaker facts must hold even though the stated equality does not
    assert n["upper_bound_holds"] and n["identity_holds"]
    assert rep.failed == 0


def test_criterion_3_ritt_soundness():
    rep, _ = suite("ritt")
    ok = rep.failed == 0 and rep.cases >= 100 and not in_IP(parse_dpoly("x0"), parse_dpoly("d(x0) - x0"))
    report(3, ok, f"ideal membership {rep.passed}/{rep.cases}")
    assert ok


def test_criterion_4_rewrite_soundness():
    rep, dt = suite("rewrite")
    ok = rep.failed == 0 and rep.notes["formulas"] == 25 and rep.notes["order_bounds"]
    report(4, ok, f"rewrites {rep.passed}/{rep.cases} on {rep.notes['formulas']} formulas, order bounds {rep.notes['order_bounds']} ({dt:.0f}s)")
    assert ok


def test_criterion_5_envelope_contract():
    rep, dt = suite("envelope")
    pts, bad = rep.notes["density_points"], rep.notes["unresolved_newton"]
    frac = bad / pts if pts else 0.0
    ok = rep.failed == 0 and frac <= 0.05
    report(5, ok, f"envelope checks {rep.passed}/{rep.cases}, unresolved Newton {bad}/{pts} ({dt:.0f}s)")
    assert ok


def test_criterion_6_hensel():
    rep, dt = suite("hensel")
    ok = rep.failed == 0 and dt < 1
    report(6, ok, f"residual zero mod t^32 in {rep.notes['steps']} steps, {dt:.3f}s")
    assert ok


def test_criterion_7_cells1d():
    rep, _ = suite("cells1d")
    ok = rep.failed == 0
    report(7, ok, f"1-D partitions and cells {rep.passed}/{rep.cases}")
    assert ok


def test_criterion_8_delta_cells():
    rep, _ = suite("deltacells")
    ok = rep.failed == 0 and rep.notes["caught"] == rep.notes["injected"] == 10
    report(8, ok, f"delta-cells {rep.passed}/{rep.cases}, injected targets caught {rep.notes['caught']}/{rep.notes['injected']}")
    assert ok


def test_criterion_9_dl_premise():
    rep, _ = suite("dl")
    slowest = 0.0
    for text, _want in DL_CASES:
        t = time.perf_counter()
        dl_premise_check(parse_dpoly(text), SampleConfig(seed=SEED))
        slowest = max(slowest, time.perf_counter() - t)
    kinds = {k: v["certificate"] for k, v in rep.notes.items()}
    ok = rep.failed == 0 and slowest < 2
    report(9, ok, f"(DL) premise {rep.passed}/{rep.cases} {kinds}, slowest case {slowest:.2f}s")
    assert ok


def test_criterion_10_determinism():
    missing = [name for name in SUITES if name not in FIRST_RUN]
    for name in missing:
        suite(name)
    same = [json.dumps(run_suite(name, seed=SEED).to_json(), sort_keys=True) == FIRST_RUN[name] for name in SUITES]
    ok = all(same)
    report(10, ok, f"byte-identical reports {sum(same)}/{len(same)}")
    assert ok
