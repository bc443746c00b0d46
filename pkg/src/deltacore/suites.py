"""Bundled verification suites over seeded random inputs and fixed corpora.

Each suite returns a :class:`SuiteReport` whose JSON form is deterministic
for a given seed and configuration (no timings are recorded in it).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .algebra.mpoly import MPoly
from .algebra.series import TruncSeries, hensel_lift_steps, eval_series_poly
from .cells import (
    CellCertificate,
    DeltaCellCertificate,
    check_cell,
    check_delta_cell,
    decompose_1d,
    delta_decompose_1var,
    verify_decomposition_1d,
)
from .diffpoly import (
    DiffPoly,
    derive,
    in_IP,
    leader,
    order_in,
    order_of_set,
    p_delta,
    prolongations,
    separant,
)
from .envelope import build_envelope, density_check, preimage_check
from .logic.formula import EQ, evaluate, conj, disj, iter_atoms, to_dnf, var_count, variables
from .logic.normal import (
    delta_nice_form,
    goodform_decompose,
    kolchin_decompose,
    last_variable,
    mk_Z,
    normalize_L,
    order_bounds_ok,
)
from .oracle.config import SampleConfig, Verdict
from .oracle.newton import dl_premise_check
from .oracle.sampling import sets_equal_sampled
from .parsing import format_poly, parse_dpoly, parse_formula

# --------------------------------------------------------------------------
# corpora

REWRITE_CORPUS = (
    "x0^2 - 1 = 0 & x0 > 0 | x0 < -2",
    "x1^2 = x0",
    "x1^2 - x0 = 0 & x1 > 0",
    "x0*x1 - 1 = 0",
    "x0*x1^2 + x1 - x0 = 0",
    "x1^3 - x0*x1 = 0 & x0 != 0",
    "(x1 - x0)*(x1 + x0) = 0",
    "x0^2 + x1^2 - 1 = 0 & x1 > 0",
    "x0 = 0 & x1^2 = 1 | x1 > 2",
    "x1^2 + x0*x1 + 1 = 0",
    "x1^2 - 2*x1*x0 + x0^2 = 0",
    "x0*x1 = 0 & x0 + x1 != 0",
    "d(x0) = x0^2",
    "d(x0)^2 = x0",
    "d(x0)^2 + x0^2 - 1 = 0",
    "d(x0)*x0 - 1 = 0 & x0 > 0",
    "d(x1) = x0 & x1^3 = x0",
    "x1^2 = 0 & d(x1)*x1 - 1 = 0",
    "d(x1)^2 - x0 = 0",
    "d^2(x0) + x0 = 0",
    "d(x1)*x0 - x1 = 0 & x0 != 0",
    "d(x0) > 0 & x0^2 < 1",
    "d(x0)^2 = x0 | d(x0) = 1",
    "d(x1) - x1^2 = 0 & d(x0) = x1",
    "x1*d(x1) - x0 = 0 & x1 > 0",
)

ENVELOPE_CORPUS = (
    "d(x0) = x0^2",
    "d(x0)^2 = x0",
    "d(x0) > 0",
    "d(x0) = x0^2 | x0 > 3",
    "d(x0) = 1 - x0^2 | d(x0) < -1",
    "d(x0) = x0 & x0 > 0",
    "d(x0)^2 + x0^2 - 1 = 0",
    "d(x0)*x0 - 1 = 0",
    "d^2(x0) + x0 = 0",
    "d^2(x0) = d(x0)^2 & x0 > 0",
    "d(x1) = x0*x1",
    "d(x1)^2 = x0 + x1",
    "d(x1) = x0 & x1^3 = x0",
    "x1^2 = x0",
    "d(x0)^3 - x0 = 0 & d(x0) != 0",
)

CELLS1D_CORPUS = (
    "x0^2 < 2",
    "x0^2 = 2",
    "(x0^2 - 1)*(x0^2 - 4) > 0",
    "x0 > 0",
    "x0 >= 0",
    "x0 != 0",
    "x0^3 - x0 = 0",
    "x0^3 - x0 >= 0",
    "x0^2 + 1 > 0",
    "x0^2 + 1 = 0",
    "x0^2 - 3*x0 + 2 <= 0",
    "x0^3 - 2 < 0 & x0 > -1",
    "x0^4 - 5*x0^2 + 6 = 0",
    "x0^4 - 5*x0^2 + 6 < 0",
    "x0^2 < 1 | x0 = 3",
    "x0 > 1 & x0 < 1",
    "x0^5 - x0 - 1 > 0",
    "x0^2 - 2 != 0 & x0^2 < 4",
    "2*x0 - 1 = 0 | 3*x0 + 1 = 0",
    "(x0 - 1)^2 > 0",
    "(x0 - 1)^2 >= 0",
    "x0^3 = 0",
    "x0^2 - x0 - 1 < 0 & x0 != 1",
    "x0 < -1 | x0 > 1 | x0 = 0",
    "x0^6 - 1 <= 0",
    "x0^2 > 1/4 & x0^2 < 9/4",
    "x0^3 - 3*x0 + 1 > 0",
    "true",
    "false",
    "x0^2 - 2 = 0 & x0 > 0",
)

DELTA_CELL_CORPUS = (
    "d(x0) > 0",
    "d(x0) = x0^2",
    "d(x0) = x0^2 | x0 > 3",
    "x0^2 < 1",
    "d(x0) = x0 & x0 > 0",
    "d(x0) = 1 - x0^2 | d(x0) < -1",
    "x0^3 - x0 = 0",
    "d(x0) = -x0 | d(x0) > 2",
    "2*d(x0) - x0^2 + 1 = 0 & x0 < 0",
    "d^2(x0) > 1",
)

DL_CASES = (
    ("d(x0)^2 + x0^2 - 1", "pass"),
    ("d(x0)^2 + x0^2 + 1", "fail"),
    ("d(x0)^2", "fail"),
)

# the hand-derived envelope of d(y) = y^2 at depth 2
HAND_ENVELOPE = ("d(x0) = x0^2", ("y1 - y0^2", "y2 - 2*y0*y1"))


# --------------------------------------------------------------------------
# reports


@dataclass
class SuiteReport:
    name: str
    cases: int = 0
    passed: int = 0
    failed: int = 0
    inconclusive: int = 0
    failures: list[dict] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def record(self, ok: bool | None, detail: dict | None = None) -> None:
        self.cases += 1
        if ok is True:
            self.passed += 1
        elif ok is False:
            self.failed += 1
            if detail is not None and len(self.failures) < 20:
                self.failures.append(detail)
        else:
            self.inconclusive += 1

    def record_verdict(self, v: Verdict, label: str) -> None:
        ok = True if v.passed else (False if v.failed else None)
        self.record(ok, {"case": label, "verdict": v.to_json()})

    @property
    def status(self) -> str:
        if self.failed:
            return "fail"
        return "inconclusive" if self.inconclusive and not self.notes.get("inconclusive_ok") else "pass"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "cases": self.cases,
            "passed": self.passed,
            "failed": self.failed,
            "inconclusive": self.inconclusive,
            "summary": f"{self.passed}/{self.cases}",
            "failures": self.failures,
            "notes": self.notes,
        }


# --------------------------------------------------------------------------
# random differential polynomials


def random_dpoly(
    rng: random.Random,
    nvars: int = 3,
    order: int = 3,
    degree: int = 4,
    terms: int = 5,
    coeff: int = 5,
) -> DiffPoly:
    """A random differential polynomial in which the last variable occurs."""
    jets = [(i, j) for i in range(nvars) for j in range(order + 1)]
    y = nvars - 1
    while True:
        p = MPoly()
        for _ in range(rng.randint(1, terms)):
            mono = MPoly.const(rng.choice([c for c in range(-coeff, coeff + 1) if c]))
            for _ in range(rng.randint(0, degree)):
                mono = mono * MPoly.var(rng.choice(jets))
            p = p + mono
        if order_in(p, y) >= 0:
            return DiffPoly(p, nvars)


def _rng(seed: int, *labels) -> random.Random:
    return random.Random(":".join(str(s) for s in (seed, *labels)))


# --------------------------------------------------------------------------
# suites


def suite_derive(cases: int = 300, seed: int = 7, cfg: SampleConfig | None = None) -> SuiteReport:
    """``derive(P) == p_delta(P) + separant(P) * next jet`` on random ``P``."""
    rep = SuiteReport("derive")
    for k in range(cases):
        rng = _rng(seed, "derive", k)
        n = rng.randint(1, 3)
        P = random_dpoly(rng, n, rng.randint(0, 3), rng.randint(1, 4))
        y = n - 1
        u = leader(P, y)
        lhs = derive(P).poly
        rhs = p_delta(P, y).poly + separant(P, y).poly * MPoly.var((y, u[1] + 1))
        rep.record(lhs == rhs, {"P": format_poly(P.poly, "delta")})
    return rep


def suite_prolong(cases: int = 100, seed: int = 7, cfg: SampleConfig | None = None, depth: int = 4) -> SuiteReport:
    """Order bookkeeping of the rational prolongations ``Q_i / s^l``.

    A case passes when every ``Q_i`` has exactly the stated orders
    (``ord_y(P)`` in ``y`` and ``ord_{x_j}(P) + i`` in each occurring
    ``x_j``). The notes also record the weaker facts that always hold: the
    orders never exceed those values, and ``s^l * y_(m+i) - Q_i`` reduces to
    zero modulo ``P``. Zero numerators are skipped.
    """
    rep = SuiteReport("prolong")
    tally = {"equal": 0, "below": 0, "absent": 0, "above": 0, "zero": 0, "identity_ok": 0, "identity_bad": 0}
    for k in range(cases):
        rng = _rng(seed, "prolong", k)
        n = rng.randint(1, 3)
        P = random_dpoly(rng, n, rng.randint(0, 2), rng.randint(1, 3), terms=4)
        y = n - 1
        m = leader(P, y)[1]
        ok, bad = True, None
        for i, f in enumerate(prolongations(P, depth, y), start=1):
            Q = f.numerator.poly
            ident = DiffPoly(f.separant_base.poly**f.sep_power * MPoly.var((y, m + i)) - Q, n)
            tally["identity_ok" if in_IP(ident, P) else "identity_bad"] += 1
            if Q.is_zero():
                tally["zero"] += 1
                continue
            checks = [(y, order_in(P, y))] + [(j, order_in(P, j) + i) for j in range(n) if j != y and order_in(P, j) >= 0]
            for j, want in checks:
                got = order_in(Q, j)
                key = "equal" if got == want else ("above" if got > want else ("absent" if got < 0 else "below"))
                tally[key] += 1
                if got != want and ok:
                    ok = False
                    bad = {"P": format_poly(P.poly, "delta"), "i": i, "var": j, "order": got, "expected": want, "Q": format_poly(Q, "delta")}
        rep.record(ok, bad)
    rep.notes.update(tally)
    rep.notes["upper_bound_holds"] = tally["above"] == 0
    rep.notes["identity_holds"] = tally["identity_bad"] == 0
    return rep


def suite_ritt(cases: int = 100, seed: int = 7, cfg: SampleConfig | None = None) -> SuiteReport:
    """``s^a * d^k(P) * G`` reduces to zero modulo ``P``; ``x`` does not reduce modulo ``dx - x``."""
    rep = SuiteReport("ritt")
    for k in range(cases):
        rng = _rng(seed, "ritt", k)
        n = rng.randint(1, 2)
        P = random_dpoly(rng, n, rng.randint(0, 2), rng.randint(1, 3), terms=3, coeff=3)
        G = random_dpoly(rng, n, 2, 2, terms=3, coeff=3)
        s = separant(P).poly
        a, kk = rng.randint(0, 2), rng.randint(0, 2)
        Q = DiffPoly(s**a * derive(P, kk).poly * G.poly, n)
        rep.record(in_IP(Q, P), {"P": format_poly(P.poly, "delta"), "G": format_poly(G.poly, "delta"), "a": a, "k": kk})
    x = parse_dpoly("x0")
    rep.record(not in_IP(x, parse_dpoly("d(x0) - x0")), {"case": "x in I(dx - x)"})
    return rep


def _keys_for(f, differential: bool):
    vs = variables(f)
    return vs if vs else ((0, 0),)


def suite_rewrite(cases: int | None = None, seed: int = 7, cfg: SampleConfig | None = None) -> SuiteReport:
    """Semantic preservation of the four rewriting procedures on the corpus."""
    cfg = (cfg or SampleConfig(count=1000)).with_(seed=seed)
    rep = SuiteReport("rewrite")
    corpus = REWRITE_CORPUS[: cases or len(REWRITE_CORPUS)]
    bounds_ok = True
    for text in corpus:
        phi = parse_formula(text)
        n = max(var_count(phi), 1)
        keys = _keys_for(phi, False)
        # plain mode
        nice = normalize_L(phi)
        rep.record_verdict(sets_equal_sampled(phi, disj(*(d.formula() for d in nice)), cfg, keys), f"normalize_L {text}")
        # differential mode
        dn = delta_nice_form(phi, n)
        rep.record_verdict(
            sets_equal_sampled(phi, disj(*(d.formula() for d in dn)), cfg, keys, differential=True),
            f"delta_nice_form {text}",
        )
        for c in to_dnf(phi):
            A = [a.poly for a in c if a.rel == EQ]
            R = MPoly.const(1)
            for a in c:
                if a.rel != EQ and a.rel != ">":
                    R = R * a.poly
            base = mk_Z(A, R)
            y = last_variable(phi)
            gf = goodform_decompose(A, R, y)
            rep.record_verdict(
                sets_equal_sampled(base, disj(*(mk_Z(B, S) for B, S in gf)), cfg, keys),
                f"goodform {text}",
            )
            kp = kolchin_decompose(A, R, n - 1)
            rep.record_verdict(
                sets_equal_sampled(base, disj(*(mk_Z(B, S) for B, S in kp)), cfg, keys, differential=True),
                f"kolchin {text}",
            )
            orders = {i: order_of_set([*A, R], i) for i in range(n)}
            if not order_bounds_ok(kp, orders, n - 1):
                bounds_ok = False
                rep.record(False, {"case": f"order bounds {text}"})
    rep.notes["order_bounds"] = bounds_ok
    rep.notes["formulas"] = len(corpus)
    return rep


def canonical_equations(f) -> set[MPoly]:
    return {a.poly.monic() for a in iter_atoms(f) if a.rel == EQ}


def suite_envelope(cases: int | None = None, seed: int = 7, cfg: SampleConfig | None = None) -> SuiteReport:
    """Preimage identity (exact) and density (sampled) of envelopes on the corpus."""
    cfg = (cfg or SampleConfig()).with_(seed=seed)
    rep = SuiteReport("envelope")
    corpus = ENVELOPE_CORPUS[: cases or len(ENVELOPE_CORPUS)]
    starts = unresolved = 0
    for text in corpus:
        E = build_envelope(parse_formula(text))
        rep.record_verdict(preimage_check(E, cfg), f"preimage {text}")
        v = density_check(E, cfg)
        starts += v.stats.get("points", 0)
        unresolved += v.stats.get("inconclusive", 0)
        rep.record_verdict(v, f"density {text}")
    src, eqs = HAND_ENVELOPE
    E = build_envelope(parse_formula(src))
    want = {parse_formula(f"{e} = 0").poly.monic() for e in eqs}
    rep.record(canonical_equations(E.target) == want and len(E.disjuncts) == 1, {"case": "hand-derived envelope"})
    rep.notes["density_points"] = starts
    rep.notes["unresolved_newton"] = unresolved
    rep.notes["unresolved_fraction"] = str(Fraction(unresolved, starts)) if starts else "0"
    return rep


def suite_hensel(cases: int | None = None, seed: int = 7, cfg: SampleConfig | None = None, N: int = 32) -> SuiteReport:
    """Lift the root 1 of ``x^2 - (1 + t)`` to precision ``N``."""
    rep = SuiteReport("hensel")
    Q = [TruncSeries.from_list([-1, -1], N), TruncSeries.const(0, N), TruncSeries.const(1, N)]
    c, steps = hensel_lift_steps(Q, 1, N)
    residual = eval_series_poly(Q, c)
    rep.record(residual.is_zero(), {"residual_valuation": residual.valuation()})
    rep.record(steps <= 6, {"steps": steps})
    rep.notes["steps"] = steps
    rep.notes["coefficients"] = [str(x) for x in c.coeffs[:6]]
    return rep


def suite_cells1d(cases: int | None = None, seed: int = 7, cfg: SampleConfig | None = None) -> SuiteReport:
    """Exact partition check and sampled cell checks of :func:`decompose_1d`."""
    cfg = (cfg or SampleConfig()).with_(seed=seed)
    rep = SuiteReport("cells1d")
    corpus = CELLS1D_CORPUS[: cases or len(CELLS1D_CORPUS)]
    for text in corpus:
        phi = parse_formula(text)
        cells = decompose_1d(phi, (0, 0))
        rep.record_verdict(verify_decomposition_1d(phi, cells, (0, 0)), f"partition {text}")
        for C in cells:
            rep.record_verdict(check_cell(C, cfg), f"cell {text}")
    shapes = {
        "x0^2 < 2": [("open", 1)],
        "x0^2 = 2": [("graph", 2)],
        "(x0^2 - 1)*(x0^2 - 4) > 0": [("open", 1)] * 3,
    }
    for text, want in shapes.items():
        got = [(C.kind, C.mult) for C in decompose_1d(parse_formula(text), (0, 0))]
        rep.record(got == want, {"case": f"worked example {text}", "got": got})
    return rep


def enlarge(D: DeltaCellCertificate) -> DeltaCellCertificate:
    """Inject a small open box, centred outside the target, into a delta-cell."""
    T = D.target_cell
    grid = [Fraction(n, 8) for n in (5, -5, 13, -13, 0, 10, -10)]
    centres = [{k: c for k in T.keys} for c in grid]
    centres += [{k: (a if j == 0 else b) for j, k in enumerate(T.keys)} for a in grid for b in grid]
    centre = next((c for c in centres if not evaluate(T.set, c)), centres[0])
    half = Fraction(1, 16)
    box = conj(*(
        parse_formula(f"{_jet_text(k)} > {centre[k] - half} & {_jet_text(k)} < {centre[k] + half}")
        for k in T.keys
    ))
    bad = CellCertificate(disj(T.set, box), T.dim, T.rho, T.kind, T.keys, T.base, T.mult, dict(T.data))
    return DeltaCellCertificate(D.set, D.depth, bad, D.nvars)


def _jet_text(k) -> str:
    i, j = k
    return f"x{i}" if j == 0 else f"d^{j}(x{i})"


def suite_deltacells(cases: int | None = None, seed: int = 7, cfg: SampleConfig | None = None) -> SuiteReport:
    """Every emitted delta-cell passes; every enlarged target fails."""
    cfg = (cfg or SampleConfig()).with_(seed=seed)
    rep = SuiteReport("deltacells")
    corpus = DELTA_CELL_CORPUS[: cases or len(DELTA_CELL_CORPUS)]
    injected = caught = 0
    for text in corpus:
        cells = delta_decompose_1var(parse_formula(text))
        for D in cells:
            rep.record_verdict(check_delta_cell(D, cfg), f"cell {text}")
        if cells:
            injected += 1
            v = check_delta_cell(enlarge(cells[0]), cfg)
            caught += v.failed
            rep.record(v.failed, {"case": f"injected {text}", "verdict": v.to_json()})
    rep.notes["injected"] = injected
    rep.notes["caught"] = caught
    return rep


def suite_dl(cases: int | None = None, seed: int = 7, cfg: SampleConfig | None = None) -> SuiteReport:
    """Premise checker verdicts on the three reference differential polynomials."""
    cfg = (cfg or SampleConfig()).with_(seed=seed)
    rep = SuiteReport("dl")
    for text, want in DL_CASES:
        v = dl_premise_check(parse_dpoly(text), cfg)
        kind = v.witnesses[0].get("kind") if v.witnesses else None
        rep.record(v.status == want, {"case": text, "verdict": v.to_json()})
        rep.notes[text] = {"status": v.status, "certificate": kind}
    return rep


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "derive": suite_derive,
    "prolong": suite_prolong,
    "ritt": suite_ritt,
    "rewrite": suite_rewrite,
    "envelope": suite_envelope,
    "hensel": suite_hensel,
    "cells1d": suite_cells1d,
    "deltacells": suite_deltacells,
    "dl": suite_dl,
}


def run_suite(name: str, cases: int | None = None, seed: int = 7, cfg: SampleConfig | None = None) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    fn = SUITES[name]
    if cases is None:
        return fn(seed=seed, cfg=cfg)
    return fn(cases, seed=seed, cfg=cfg)
