"""Newton search for regular zeros with exact interval certification.

Floating point is used only to find candidates. A candidate is accepted
after a Krawczyk test over rational intervals proves that a unique zero of
the system lies in a small box around it, and the separant guard is shown
nonzero on that whole box.

The (DL) axiom concludes that genuine differential solutions approximate
every regular zero. That conclusion needs a model of the theory and is not
checked here; only the premise (existence of a regular zero) is.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ..algebra.enclosure import Enclosure, enclose
from ..algebra.mpoly import MPoly, Var
from ..diffpoly import DiffPoly, leader, separant
from .config import FAIL, INCONCLUSIVE, PASS, SampleConfig, Verdict, dyadic, point_json
from .sampling import grid_values


@dataclass(frozen=True)
class RegularZero:
    """A certified regular zero: the exact zero lies in ``box`` around ``point``."""

    point: dict[Var, Fraction]
    box: dict[Var, tuple[Fraction, Fraction]]
    residual: float
    guard: tuple[Fraction, Fraction] | None

    def to_json(self) -> dict:
        return {
            "point": point_json(self.point),
            "box": {f"{i},{j}": [str(lo), str(hi)] for (i, j), (lo, hi) in sorted(self.box.items())},
            "residual": repr(self.residual),
            "guard": None if self.guard is None else [str(self.guard[0]), str(self.guard[1])],
        }


def _dyadic_round(x: float, bits: int = 48) -> Fraction:
    return Fraction(round(x * (1 << bits)), 1 << bits)


def _float_eval(p: MPoly, point: Mapping[Var, float]) -> float:
    return float(p.eval(point))


def _newton_float(F, J, x0: np.ndarray, tol: float, max_iter: int) -> np.ndarray | None:
    x = x0.astype(float)
    for _ in range(max_iter):
        fx = F(x)
        if not np.all(np.isfinite(fx)):
            return None
        if np.max(np.abs(fx), initial=0.0) < tol:
            return x
        jx = J(x)
        try:
            step = np.linalg.lstsq(jx, fx, rcond=None)[0]
        except np.linalg.LinAlgError:
            return None
        x = x - step
        if not np.all(np.isfinite(x)) or np.max(np.abs(x), initial=0.0) > 1e8:
            return None
    return x if np.max(np.abs(F(x)), initial=0.0) < tol else None


def krawczyk(eqs: Sequence[MPoly], unknowns: Sequence[Var], fixed: Mapping[Var, Fraction], centre: Sequence[Fraction], radius: Fraction) -> bool:
    """Krawczyk test: True proves a unique zero in the box ``centre +- radius``."""
    n = len(unknowns)
    jac = [[e.diff(u) for u in unknowns] for e in eqs]
    mid = dict(fixed)
    mid.update(zip(unknowns, centre))
    jm = np.array([[float(Fraction(j.eval(mid))) for j in row] for row in jac])
    try:
        Yf = np.linalg.inv(jm)
    except np.linalg.LinAlgError:
        return False
    Y = [[_dyadic_round(Yf[i, k], 40) for k in range(n)] for i in range(n)]
    box = {**{k: Enclosure.point(v) for k, v in fixed.items()}}
    for u, c in zip(unknowns, centre):
        box[u] = Enclosure(c - radius, c + radius)
    fc = [Fraction(e.eval(mid)) for e in eqs]
    JX = [[enclose(j, box) for j in row] for row in jac]
    for i in range(n):
        acc = Enclosure.point(centre[i] - sum(Y[i][k] * fc[k] for k in range(n)))
        for j in range(n):
            # (I - Y J(X))_{ij} * (X_j - c_j)
            m = Enclosure.point(1 if i == j else 0)
            for k in range(n):
                m = m - JX[k][j] * Y[i][k]
            acc = acc + m * Enclosure(-radius, radius)
        if not (centre[i] - radius < acc.lo and acc.hi < centre[i] + radius):
            return False
    return True


def newton_regular_zero(
    eqs: Sequence[MPoly] | MPoly,
    start: Mapping[Var, object],
    cfg: SampleConfig | None = None,
    guard: MPoly | None = None,
    unknowns: Sequence[Var] | None = None,
) -> RegularZero | None:
    """Newton search from ``start`` for a zero of ``eqs`` with ``guard != 0``.

    Coordinates other than ``unknowns`` are held at their start values;
    by default the unknowns are the largest ``len(eqs)`` coordinates that
    occur. Returns None when the search diverges or cannot be certified.
    """
    cfg = cfg or SampleConfig()
    eqs = [eqs] if isinstance(eqs, MPoly) else list(eqs)
    allv = sorted({v for e in eqs for v in e.variables} | ({*guard.variables} if guard is not None else set()))
    if unknowns is None:
        occurring = sorted({v for e in eqs for v in e.variables})
        unknowns = occurring[-len(eqs):] if eqs else []
    unknowns = list(unknowns)
    if len(unknowns) != len(eqs) or not eqs:
        raise ValueError("the system must be square in the chosen unknowns")
    fixed = {v: Fraction(start[v]) if not isinstance(start[v], float) else _dyadic_round(start[v]) for v in allv if v not in unknowns}
    ffix = {k: float(v) for k, v in fixed.items()}
    jac = [[e.diff(u) for u in unknowns] for e in eqs]

    def F(x):
        pt = {**ffix, **dict(zip(unknowns, x))}
        return np.array([_float_eval(e, pt) for e in eqs])

    def J(x):
        pt = {**ffix, **dict(zip(unknowns, x))}
        return np.array([[_float_eval(j, pt) for j in row] for row in jac])

    x0 = np.array([float(start[u]) for u in unknowns])
    x = _newton_float(F, J, x0, 1e-13, cfg.max_iter)
    if x is None:
        return None
    centre = [_dyadic_round(float(v)) for v in x]
    point = {**fixed, **dict(zip(unknowns, centre))}
    residual = float(max(abs(Fraction(e.eval(point))) for e in eqs))
    if residual > float(cfg.newton_tol) * max(1.0, max(abs(float(c)) for c in centre)):
        return None
    for r in (Fraction(1, 2**36), Fraction(1, 2**28), Fraction(1, 2**20)):
        if krawczyk(eqs, unknowns, fixed, centre, r):
            box = {u: (c - r, c + r) for u, c in zip(unknowns, centre)}
            g = None
            if guard is not None:
                enc = enclose(guard, {**fixed, **{u: Enclosure(lo, hi) for u, (lo, hi) in box.items()}})
                if enc.contains_zero() or enc.magnitude() <= cfg.newton_tol:
                    return None
                g = (enc.lo, enc.hi)
            return RegularZero(point, box, residual, g)
    return None


# --------------------------------------------------------------------------
# (DL) premise


def _exclusion_cover(p: MPoly, box: dict[Var, Enclosure], depth: int) -> list | None:
    """Boxes covering ``box`` on each of which ``p`` has a certified sign."""
    enc = enclose(p, box)
    if not enc.contains_zero():
        return [(box, enc)]
    if depth == 0:
        return None
    v = max(box, key=lambda k: box[k].width)
    b = box[v]
    out = []
    for half in (Enclosure(b.lo, b.mid), Enclosure(b.mid, b.hi)):
        sub = _exclusion_cover(p, {**box, v: half}, depth - 1)
        if sub is None:
            return None
        out.extend(sub)
    return out


def _radical_certificate(ps: MPoly, s: MPoly) -> tuple[int, MPoly] | None:
    """Find ``k, A`` with ``s^k = A * ps``: then every zero of ``ps`` kills ``s``."""
    d = max(ps.total_degree(), 1)
    sk = MPoly.const(1)
    for k in range(1, d + 1):
        sk = sk * s
        q = sk.exact_div(ps)
        if q is not None:
            return k, q
    return None


def dl_premise_check(P: DiffPoly, cfg: SampleConfig | None = None) -> Verdict:
    """Check the premise of a (DL) instance: does ``P* = 0, s_P* != 0`` have a real zero?

    Pass comes with a certified regular zero found by multi-start Newton on
    the leading jet (lower jets fixed on a grid and at random). Fail comes
    with an exact certificate: either ``s^k`` is a multiple of ``P*`` (so no
    zero is regular), or a cover of the box by sub-boxes on which the
    interval enclosure of ``P*`` excludes zero. Otherwise inconclusive.
    """
    cfg = cfg or SampleConfig()
    if P.nvars != 1:
        raise ValueError("the (DL) checker handles one differential variable")
    u = leader(P)
    if u[1] < 1:
        raise ValueError("the (DL) scheme concerns order at least 1")
    ps = P.poly
    s = separant(P).poly
    keys = [(0, j) for j in range(u[1] + 1)]
    lower = keys[:-1]
    starts = [dict(zip(lower, g)) for g in itertools.product(*(grid_values(cfg, k) for k in lower))]
    rng = cfg.rng("dl")
    starts += [{k: dyadic(rng, *cfg.range_for(k)) for k in lower} for _ in range(32)]
    lead_starts = [Fraction(1, 2), Fraction(-1, 2), Fraction(1), Fraction(-1), Fraction(2), Fraction(-2)]
    for st in starts:
        for y in lead_starts:
            z = newton_regular_zero([ps], {**st, u: y}, cfg, guard=s, unknowns=[u])
            if z is not None:
                return Verdict(PASS, [{"kind": "regular-zero", **z.to_json()}], "", {"starts": len(starts)})
    cert = _radical_certificate(ps, s)
    if cert is not None:
        k, A = cert
        return Verdict(
            FAIL,
            [{"kind": "separant-radical", "power": k, "cofactor": str(A), "identity": "s^k = cofactor * P*"}],
            "every zero of P* annihilates the separant",
        )
    box = {k: Enclosure(*cfg.range_for(k)) for k in keys}
    cover = _exclusion_cover(ps, box, 10)
    if cover is not None:
        return Verdict(
            FAIL,
            [
                {
                    "kind": "interval-exclusion",
                    "boxes": len(cover),
                    "enclosures": [[str(e.lo), str(e.hi)] for _, e in cover[:8]],
                }
            ],
            "P* has no zero on the box",
        )
    return Verdict(INCONCLUSIVE, [], "no regular zero found and no exclusion certificate")
