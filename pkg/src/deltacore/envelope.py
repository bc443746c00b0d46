"""Envelopes, block projections, linked triples and the finiteness bound.

Jet semantics throughout: a differential point is represented by its jet
tuple, and the jets of genuine points are those that respect the derivatives
of every equation they satisfy. The envelope of a differential formula of
order ``m`` is a plain formula at depth ``d = 2m`` whose jet preimage is the
original set; on each piece with a principal equation ``P`` its higher jets
are pinned down by the separant-cleared prolongations of ``P``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra.enclosure import Enclosure
from .algebra.mpoly import MPoly, Var
from .diffpoly import DiffPoly, order_in, separant
from .logic.formula import (
    EQ,
    GT,
    Formula,
    conj,
    disj,
    evaluate,
    evaluate_box,
    jet_depth,
    polys,
    to_dnf,
    var_count,
    variables,
)
from .logic.normal import NiceDisjunct, delta_nice_form, lambda_formula, mk_Z
from .oracle.config import FAIL, INCONCLUSIVE, PASS, JetPoint, SampleConfig, Verdict, dyadic, point_json, sup_distance
from .oracle.newton import newton_regular_zero
from .oracle.sampling import (
    PointSet,
    closure_density_sampled,
    consistent,
    derivative_closure,
    formula_excludes_ball,
    solve_system,
    uniform_point,
)
from .parsing import format_formula, format_poly

Point = Mapping[Var, Fraction]


# --------------------------------------------------------------------------
# construction


@dataclass
class Envelope:
    """The plain formula ``target`` at depth ``depth`` enveloping ``source``."""

    source: Formula
    nvars: int
    order: int
    depth: int
    target: Formula
    certificates: list[dict]
    pieces: list[NiceDisjunct] = field(default_factory=list)
    disjuncts: list[Formula] = field(default_factory=list)

    @property
    def keys(self) -> tuple[Var, ...]:
        return tuple((i, j) for i in range(self.nvars) for j in range(self.depth + 1))

    def to_json(self) -> dict:
        return {
            "source": format_formula(self.source, "delta"),
            "target": format_formula(self.target, "plain", "yij" if self.nvars > 1 else "y"),
            "order": self.order,
            "depth": self.depth,
            "nvars": self.nvars,
            "certificates": self.certificates,
        }


def _lambda_depth(P: MPoly, y: int, d: int, nvars: int) -> int:
    """Number of prolongations that fit in depth ``d``."""
    k = order_in(P, y)
    e = d - k
    for i in range(nvars):
        if i != y and order_in(P, i) >= 0:
            e = min(e, d - order_in(P, i))
    return max(e, 0)


def build_envelope(phi: Formula, nvars: int | None = None) -> Envelope:
    """Envelope of a differential formula with respect to its last variable.

    Pieces of the differential nice form without an equation in ``y`` give
    ``Z_A and theta and S != 0`` unchanged. A piece with principal equation
    ``P`` of order ``k`` gives the lambda formula of ``P`` with ``d - k``
    prolongations (fewer if other variables would leave the depth), the
    piece's remaining equations, ``theta`` and ``S != 0``.
    """
    n = max(var_count(phi), 1) if nvars is None else nvars
    m = jet_depth(phi)
    d = 2 * m
    y = n - 1
    pieces = delta_nice_form(phi, n)
    disjuncts: list[Formula] = []
    certs: list[dict] = []
    for nd in pieces:
        P = nd.principal(y)
        rest = [q for q in nd.equations if q != P]
        if P is None:
            psi = conj(mk_Z(nd.equations, nd.side), nd.open_part)
            certs.append(
                {
                    "case": "i",
                    "equations": [format_poly(q, "delta") for q in nd.equations],
                    "side": format_poly(nd.side, "delta"),
                    "open": format_formula(nd.open_part, "delta"),
                }
            )
        else:
            e = _lambda_depth(P, y, d, n)
            lam = lambda_formula(DiffPoly(P, n), e, y)
            psi = conj(lam, mk_Z(rest, nd.side), nd.open_part)
            certs.append(
                {
                    "case": "ii",
                    "principal": format_poly(P, "delta"),
                    "order": order_in(P, y),
                    "degree": P.degree((y, order_in(P, y))),
                    "separant": format_poly(separant(DiffPoly(P, n), y).poly, "delta"),
                    "prolongations": e,
                    "equations": [format_poly(q, "delta") for q in rest],
                    "side": format_poly(nd.side, "delta"),
                    "open": format_formula(nd.open_part, "delta"),
                }
            )
        disjuncts.append(psi)
    return Envelope(phi, n, m, d, disj(*disjuncts), certs, pieces, disjuncts)


# --------------------------------------------------------------------------
# block projections


def project_block(m: int, d: int, p, nvars: int | None = None):
    """Truncate every block of depth ``d`` to its first ``m + 1`` coordinates.

    Points may be :class:`JetPoint`, mappings or flat sequences (then
    ``nvars`` blocks of length ``d + 1``). On formulas this is a renaming
    that only succeeds when no coordinate above ``m`` occurs.
    """
    if not 0 <= m <= d:
        raise ValueError("need 0 <= m <= d")
    if isinstance(p, Formula):
        bad = [v for v in variables(p) if v[1] > m]
        if bad:
            raise ValueError(f"projected variable occurs: {bad[0]}")
        return p
    if isinstance(p, JetPoint):
        if p.depth != d:
            raise ValueError(f"arity mismatch: point has depth {p.depth}, expected {d}")
        return JetPoint.from_mapping(p.as_mapping(), p.nvars, m)
    if isinstance(p, Mapping):
        return {k: v for k, v in p.items() if k[1] <= m}
    seq = list(p)
    b = d + 1
    if nvars is None:
        if len(seq) % b:
            raise ValueError(f"arity mismatch: {len(seq)} coordinates are not blocks of {b}")
        nvars = len(seq) // b
    if len(seq) != nvars * b:
        raise ValueError(f"arity mismatch: expected {nvars * b} coordinates")
    return tuple(c for i in range(nvars) for c in seq[i * b : i * b + m + 1])


# --------------------------------------------------------------------------
# sampling helpers


def _family(E: Envelope) -> list[MPoly]:
    fam = list(polys(E.source))
    for nd in E.pieces:
        fam.extend(nd.equations)
    return fam


def _y_index(keys: Sequence[Var]) -> int:
    return max(k[0] for k in keys)


def _closure_eqs(eqs: Sequence[MPoly], depth: int) -> list[MPoly]:
    return [g for e in eqs for g in derivative_closure(e, depth)]


def _conjunct_systems(f: Formula, depth: int, close: bool | int) -> list[tuple[list, list[MPoly]]]:
    """DNF conjuncts of ``f`` with their equations.

    ``close=True`` closes every equation under derivation up to ``depth``;
    an integer ``y`` closes only the equations free of ``y``.
    """
    out = []
    for c in to_dnf(f):
        eqs = [a.poly for a in c if a.rel == EQ]
        if close is True:
            eqs = _closure_eqs(eqs, depth)
        elif close is not False:
            eqs = [g for e in eqs for g in (derivative_closure(e, depth) if order_in(e, close) < 0 else [e])]
        out.append((c, eqs))
    return out


def _conjunct_cfg(c, keys: Sequence[Var], cfg: SampleConfig) -> SampleConfig:
    """``cfg`` with each key's range moved inside the conjunct's linear bounds on it.

    A bound beyond the default box shifts the window past it, keeping its width.
    """
    lower: dict[Var, Fraction] = {}
    upper: dict[Var, Fraction] = {}
    for a in c:
        vs = a.poly.variables
        if a.rel != GT or len(vs) != 1 or vs[0] not in keys or a.poly.total_degree() != 1:
            continue
        v = vs[0]
        slope = a.poly.coeffs_in(v)[1].constant_value()
        root = -a.poly.coeffs_in(v).get(0, MPoly()).constant_value() / slope
        if slope > 0:
            lower[v] = max(lower.get(v, root), root)
        else:
            upper[v] = min(upper.get(v, root), root)
    boxes = []
    for k in keys:
        lo, hi = cfg.range_for(k)
        width = hi - lo
        L, U = lower.get(k), upper.get(k)
        if L is not None and U is not None:
            new = (max(lo, L), min(hi, U)) if max(lo, L) < min(hi, U) else (L, U)
        elif L is not None:
            new = (max(lo, L), hi) if L < hi else (L, L + width)
        elif U is not None:
            new = (lo, min(hi, U)) if U > lo else (U - width, U)
        else:
            continue
        if new[0] < new[1] and new != (lo, hi):
            boxes.append((k, *new))
    return cfg.with_(boxes=tuple(boxes) + tuple(cfg.boxes)) if boxes else cfg


def sample_points(
    f: Formula,
    keys: Sequence[Var],
    depth: int,
    cfg: SampleConfig,
    label: str,
    close: bool | int = True,
    budget: int | None = None,
) -> list[dict[Var, Fraction]]:
    """Exact points of ``f`` found by triangular solving of each DNF conjunct.

    With ``close`` the conjunct's equations are closed under derivation up to
    ``depth`` first, which makes the points respect the differential
    structure; an integer closes only the equations free of that variable.
    """
    budget = cfg.count if budget is None else budget
    systems = _conjunct_systems(f, depth, close)
    out: list[dict[Var, Fraction]] = []
    if not systems:
        return out
    per = max(1, budget // len(systems))
    for si, (c, eqs) in enumerate(systems):
        got = 0
        ccfg = _conjunct_cfg(c, keys, cfg)
        for t in range(3 * per):
            if got >= per:
                break
            p = solve_system(eqs, keys, ccfg, label, si, t)
            if p is None:
                continue
            p = {k: p[k] for k in keys}
            if evaluate(f, p):
                out.append(p)
                got += 1
    return out


def classify_point(E: Envelope, p: Mapping[Var, object]) -> dict:
    """Exact status of one jet point of depth ``E.depth``."""
    pt = {k: Fraction(v) for k, v in p.items()}
    in_target = evaluate(E.target, pt)
    src = evaluate(E.source, pt)
    genuine = consistent(pt, _family(E), E.depth)
    return {"in_target": in_target, "source_holds": src, "prolongation_consistent": genuine}


def _as_mapping(E: Envelope, p) -> dict[Var, Fraction]:
    if isinstance(p, JetPoint):
        return p.as_mapping()
    if isinstance(p, Mapping):
        return {tuple(k): Fraction(v) for k, v in p.items()}
    seq = list(p)
    if len(seq) != len(E.keys):
        raise ValueError(f"expected {len(E.keys)} coordinates, got {len(seq)}")
    return dict(zip(E.keys, (Fraction(c) for c in seq)))


# --------------------------------------------------------------------------
# checks


def preimage_check(E: Envelope, cfg: SampleConfig | None = None, points: Sequence = ()) -> Verdict:
    """Exact check that the source is the jet preimage of the target.

    Direction one: every sampled target point truncates to a source point.
    Direction two: every sampled source point, extended to depth ``d`` along
    the derivatives of its equations, lies in the target. Explicit
    ``points`` are checked in direction one.
    """
    cfg = cfg or SampleConfig()
    keys = E.keys
    fails: list[dict] = []
    explicit = [_as_mapping(E, p) for p in points]
    tgt = sample_points(E.target, keys, E.depth, cfg, "pre-target")
    tgt += [uniform_point(cfg, keys, "pre-uniform", k) for k in range(cfg.count // 4)]
    n_in = 0
    for p in explicit + tgt:
        if evaluate(E.target, p):
            n_in += 1
            if not evaluate(E.source, p):
                fails.append({"point": point_json(p), "direction": "target point outside source"})
    # direction two: genuine source jets extended to depth d
    fam = _family(E)
    src_formula = disj(*(nd.formula() for nd in E.pieces))
    srcs = sample_points(src_formula, keys, E.depth, cfg, "pre-source")
    srcs += [uniform_point(cfg, keys, "pre-src-uniform", k) for k in range(cfg.count // 4)]
    n_src = 0
    for p in srcs:
        if not evaluate(E.source, p) or not consistent(p, fam, E.depth):
            continue
        n_src += 1
        if not evaluate(E.target, p):
            fails.append({"point": point_json(p), "direction": "prolonged source point outside target"})
    stats = {"target_points": n_in, "source_points": n_src, "explicit": len(explicit)}
    if fails:
        return Verdict(FAIL, fails[:10], "preimage identity violated", stats)
    return Verdict(PASS, [], "", stats)


def _y_equations(c, y: int) -> list[MPoly]:
    return [a.poly for a in c if a.rel == EQ and order_in(a.poly, y) >= 0]


def _strict_part(c) -> Formula:
    return conj(*(a for a in c if a.rel != EQ))


def _density_witness(
    c,
    p: Point,
    keys: Sequence[Var],
    y: int,
    depth: int,
    radius: Fraction,
    cfg: SampleConfig,
    fam: Sequence[MPoly],
) -> dict | None:
    """A genuine jet near ``p`` in the conjunct ``c``, with the x-jets of ``p`` kept.

    The y-coordinates that no closed y-equation pins down are nudged by at
    most a quarter of ``radius``; the pinned ones are then solved exactly
    when possible and by certified Newton otherwise.
    """
    eqs = _closure_eqs(_y_equations(c, y), depth)
    unknowns, square, seen = [], [], set()
    for e in eqs:
        u = max(v for v in e.variables if v[0] == y)
        if u not in seen:
            # equations sharing a leader are redundant on the variety
            seen.add(u)
            unknowns.append(u)
            square.append(e)
    free = [k for k in keys if k[0] == y and k not in seen]
    rng = cfg.rng("witness", tuple(sorted(point_json(p).items())))
    for t in range(6):
        fixed = {k: p[k] for k in keys if k not in seen}
        for k in free:
            fixed[k] = p[k] + radius / 4 * dyadic(rng, Fraction(-1), Fraction(1))
        q = solve_system(eqs, keys, cfg, "witness", t, fixed=fixed) if eqs else dict(fixed)
        if q is not None:
            q = {k: q[k] for k in keys}
            if sup_distance(q, p, keys) <= float(radius) and all(evaluate(a, q) for a in c) and consistent(q, fam, depth):
                return {"kind": "exact", "point": point_json(q)}
        if not eqs:
            continue
        z = newton_regular_zero(square, {**fixed, **{u: p[u] for u in unknowns}}, cfg, unknowns=unknowns)
        if z is None:
            continue
        zp = {**fixed, **{u: p[u] for u in unknowns}, **z.point}
        if sup_distance(zp, p, keys) > float(radius):
            continue
        box = {k: zp[k] for k in keys}
        for u, (lo, hi) in z.box.items():
            box[u] = Enclosure(lo, hi)
        if evaluate_box(_strict_part(c), box) is True:
            return {"kind": "newton", **z.to_json()}
    return None


def density_check(E: Envelope, cfg: SampleConfig | None = None, radius: Fraction | None = None, points: Sequence = ()) -> Verdict:
    """Sampled check that genuine jets of the source are dense in the target.

    For each sampled target point ``(a, c)`` (x-jets ``a`` consistent) a
    witness is sought within ``radius`` of ``c`` with the same ``a``: the
    point itself when its y-jets already respect the derivatives of the
    equations, otherwise a certified Newton zero of the closed y-equations.
    A point whose ball is certified disjoint from the source fails; a failed
    search is inconclusive.
    """
    cfg = cfg or SampleConfig()
    radius = cfg.epsilon if radius is None else Fraction(radius)
    keys = E.keys
    y = E.nvars - 1
    fam = _family(E)
    pts = [_as_mapping(E, p) for p in points]
    pts += sample_points(E.target, keys, E.depth, cfg, "density", close=y)
    pts += [p for p in (uniform_point(cfg, keys, "density-uniform", k) for k in range(cfg.count // 4)) if evaluate(E.target, p)]
    systems = _conjunct_systems(E.target, E.depth, False)
    xfam = [f for f in fam if order_in(f, y) < 0]
    fails, unresolved, direct, newton, skipped = [], [], 0, 0, 0
    cache: dict[tuple, dict | None] = {}
    for p in pts:
        if not evaluate(E.target, p):
            continue
        if not consistent(p, xfam, E.depth):
            # x-jets that no differential point has are outside the claim
            skipped += 1
            continue
        if consistent(p, fam, E.depth):
            direct += 1
            continue
        key = tuple(p[k] for k in keys)
        if key not in cache:
            # conjuncts holding at p first, then the neighbouring ones
            ordered = sorted(systems, key=lambda s: not all(evaluate(a, p) for a in s[0]))
            cache[key] = next(
                (w for c, _ in ordered if (w := _density_witness(c, p, keys, y, E.depth, radius, cfg, fam)) is not None),
                None,
            )
        w = cache[key]
        if w is not None:
            newton += 1
            continue
        if formula_excludes_ball(E.source, p, radius):
            fails.append({"point": point_json(p), "certified": True, "note": "source misses the ball"})
        else:
            unresolved.append({"point": point_json(p)})
    total = direct + newton + len(fails) + len(unresolved)
    stats = {"points": total, "direct": direct, "newton": newton, "inconclusive": len(unresolved), "skipped": skipped}
    if fails:
        return Verdict(FAIL, fails[:10], "target points far from every genuine jet", stats)
    if total and len(unresolved) > total // 20:
        return Verdict(INCONCLUSIVE, unresolved[:10], "too many unresolved Newton starts", stats)
    if total == 0:
        return Verdict(INCONCLUSIVE, [], "no target point sampled", stats)
    return Verdict(PASS, [], "", stats)


# --------------------------------------------------------------------------
# linked triples


@dataclass
class LinkedTriple:
    """``(X, Z, m)``: a differential set, a plain formula at depth ``m`` and the depth."""

    X: Formula
    Z: Formula
    m: int
    nvars: int = 1
    envelope: Envelope | None = None

    def to_json(self) -> dict:
        return {
            "X": format_formula(self.X, "delta"),
            "Z": format_formula(self.Z, "plain", "yij" if self.nvars > 1 else "y"),
            "m": self.m,
        }


def linked_triple_1var(phi: Formula) -> LinkedTriple:
    """The triple ``(phi, Y, 2m)`` from the envelope of a one-variable formula."""
    if var_count(phi) > 1:
        raise ValueError("linked_triple_1var takes formulas in one differential variable")
    E = build_envelope(phi, 1)
    if E.order == 0:
        return LinkedTriple(phi, phi, 0, 1, E)
    return LinkedTriple(phi, E.target, E.depth, 1, E)


def closure_projection_check(T: LinkedTriple, m: int, cfg: SampleConfig | None = None) -> Verdict:
    """Sampled comparison of the projection of ``Z`` to depth ``m`` with the depth-``m`` jets of ``X``.

    Both directions use an epsilon-net. Points of the projection with no
    nearby jet of ``X`` fail when an interval certificate shows ``X`` misses
    the epsilon-ball; jets of ``X`` are matched by prolonging them into ``Z``.
    """
    cfg = cfg or SampleConfig()
    if m > T.m:
        raise ValueError("m must not exceed the depth of the triple")
    if jet_depth(T.X) > m:
        raise ValueError("m is below the order of X")
    n = T.nvars
    zkeys = tuple((i, j) for i in range(n) for j in range(T.m + 1))
    xkeys = tuple((i, j) for i in range(n) for j in range(m + 1))
    y = n - 1
    E = T.envelope or build_envelope(T.X, n)
    fam = _family(E)
    zs = sample_points(T.Z, zkeys, T.m, cfg, "cl-z", close=y)
    zs += [p for p in (uniform_point(cfg, zkeys, "cl-z-uniform", k) for k in range(cfg.count // 2)) if evaluate(T.Z, p)]
    A = [project_block(m, T.m, p) for p in zs]
    src_formula = disj(*(nd.formula() for nd in E.pieces)) if E.pieces else T.X
    xs = sample_points(src_formula, xkeys, m, cfg, "cl-x")
    xs += [p for p in (uniform_point(cfg, xkeys, "cl-x-uniform", k) for k in range(cfg.count // 2)) if evaluate(T.X, p)]
    B = [p for p in xs if evaluate(T.X, p) and consistent(p, fam, m)]
    systems = _conjunct_systems(src_formula, m, False)

    def locate_x(a: Point) -> Point | None:
        for c, _ in systems:
            w = _density_witness(c, a, xkeys, y, m, cfg.epsilon, cfg, fam)
            if w is not None:
                return {tuple(map(int, k.split(","))): Fraction(v) for k, v in w["point"].items()}
        return None

    def locate_z(b: Point) -> Point | None:
        for si, (c, eqs) in enumerate(_conjunct_systems(T.Z, T.m, True)):
            q = solve_system(eqs, zkeys, cfg, "cl-lift", si, fixed=dict(b))
            if q is not None and evaluate(T.Z, q):
                return project_block(m, T.m, q)
        return None

    # X-jets are matched by lifting them into Z along their prolongations
    left = PointSet(A, locate_z, None, "Z-projection")
    right = PointSet(B, locate_x, lambda a, r: formula_excludes_ball(T.X, a, r), "X-jets")
    return closure_density_sampled(left, right, cfg, xkeys)


# --------------------------------------------------------------------------
# finiteness


def _fiber_bound_conjunct(c, y: int, nvars: int) -> int | None:
    """Bound on finite fibres in ``y`` of one DNF conjunct, or None if possibly infinite."""
    from .logic.normal import kolchin_decompose

    eqs = [a.poly for a in c if a.rel == EQ]
    direct = []
    for e in eqs:
        if order_in(e, y) == 0:
            cs = e.coeffs_in((y, 0))
            if any(k > 0 for k in cs) and any(q.is_constant() and not q.is_zero() for k, q in cs.items() if k > 0):
                direct.append(e.degree((y, 0)))
    if direct:
        return min(direct)
    total = 0
    for B, S in kolchin_decompose(eqs, 1, y):
        P = [q for q in B if order_in(q, y) >= 0]
        if not P or order_in(P[0], y) > 0:
            return None
        total += P[0].degree((y, 0))
    return total


def finiteness_bound(E: Envelope | Formula, nvars: int | None = None) -> int | None:
    """Upper bound on every finite fibre ``X_a`` of the last variable; None means possibly infinite.

    Each DNF conjunct contributes the degree of an order-zero equation whose
    zero set in ``y`` is finite for every parameter value (some coefficient in
    ``y`` is a nonzero constant); failing that, the degrees of the order-zero
    principal equations of its splitting. A conjunct with no such equation
    makes the bound unavailable.
    """
    if isinstance(E, Envelope):
        phi, n = E.source, E.nvars
    else:
        phi = E
        n = max(var_count(phi), 1) if nvars is None else nvars
    y = n - 1
    total = 0
    for c in to_dnf(phi):
        b = _fiber_bound_conjunct(c, y, n)
        if b is None:
            return None
        total += b
    return total
