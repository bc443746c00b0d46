"""Exact evaluation, structured sampling, sampled set equality and probes.

Every decision about a polynomial sign is made in exact rational arithmetic.
Randomness only chooses where to look, and every stream is derived from the
configured seed and a label, so identical configurations give identical
verdicts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from ..algebra.mpoly import MPoly, Var
from ..algebra.univariate import isolate_real_roots, peval, refine, to_dense
from ..diffpoly import DiffPoly, derive_poly
from ..logic.formula import EQ, Formula, evaluate, evaluate_box, map_polys, polys, to_dnf, variables
from .config import FAIL, INCONCLUSIVE, PASS, JetPoint, SampleConfig, Verdict, dyadic, point_json, sup_distance

Point = Mapping[Var, Fraction]


def eval_at(obj, p: JetPoint | Point):
    """Exact value of a polynomial, or truth value of a formula, at a jet point."""
    mapping = p.as_mapping() if isinstance(p, JetPoint) else p
    if isinstance(obj, DiffPoly):
        obj = obj.poly
    try:
        if isinstance(obj, MPoly):
            return Fraction(obj.eval(mapping))
        if isinstance(obj, Formula):
            return evaluate(obj, mapping)
    except KeyError as exc:
        raise ValueError(f"depth mismatch: {exc.args[0]}") from None
    raise TypeError(f"cannot evaluate {type(obj).__name__}")


# --------------------------------------------------------------------------
# differential consistency


def derivative_closure(p: MPoly, depth: int) -> list[MPoly]:
    """``p`` and its derivatives whose jets stay within ``depth``."""
    out = [p]
    while True:
        q = derive_poly(out[-1])
        if q.is_zero() or max((v[1] for v in q.variables), default=0) > depth:
            return out
        out.append(q)


def consistent(point: Point, fam: Iterable[MPoly], depth: int) -> bool:
    """Whether ``point`` behaves like the jet of a differential point for ``fam``.

    For each ``f`` in the family vanishing at the point, its derivatives up
    to ``depth`` must vanish too (as they do at genuine differential points).
    """
    for f in fam:
        if f.is_constant() or Fraction(f.eval(point)) != 0:
            continue
        if any(Fraction(g.eval(point)) != 0 for g in derivative_closure(f, depth)[1:]):
            return False
    return True


# --------------------------------------------------------------------------
# point generation


def uniform_point(cfg: SampleConfig, keys: Sequence[Var], *stream) -> dict[Var, Fraction]:
    rng = cfg.rng(*stream)
    return {k: dyadic(rng, *cfg.range_for(k)) for k in keys}


def _univariate_roots(q: MPoly, exact_only: bool, width: Fraction) -> list[Fraction]:
    _, dense = to_dense(q)
    if len(dense) == 2:
        return [-dense[0] / dense[1]]
    out = []
    for iv in isolate_real_roots(dense):
        if iv.is_point:
            out.append(iv.lo)
            continue
        r = refine(dense, iv, width)
        if r.is_point:
            out.append(r.lo)
            continue
        # a rational root with a small denominator is recovered exactly
        guess = r.midpoint.limit_denominator(1 << 20)
        if peval(dense, guess) == 0:
            out.append(guess)
        elif not exact_only:
            out.append(r.midpoint)
    return out


def solve_system(
    eqs: Sequence[MPoly],
    keys: Sequence[Var],
    cfg: SampleConfig,
    *stream,
    fixed: Mapping[Var, Fraction] | None = None,
    exact: bool = True,
) -> dict[Var, Fraction] | None:
    """Triangular search for a point where all ``eqs`` vanish.

    Equations with the fewest free coordinates are treated first; each is
    solved for its largest coordinate of degree one (other free coordinates
    drawn at random), or as a univariate polynomial when no such coordinate
    exists. With ``exact`` only rational roots are used, so the point
    satisfies the equations exactly. Returns None when the search dead-ends.
    """
    rng = cfg.rng("solve", *stream)
    point: dict[Var, Fraction] = dict(fixed or {})
    pending = [e for e in eqs if not e.is_zero()]
    width = Fraction(1, 2**50)
    while pending:
        reduced = []
        for e in pending:
            q = e.partial_eval(point)
            if q.is_zero():
                continue
            if q.is_constant():
                return None
            reduced.append(q)
        if not reduced:
            break
        reduced.sort(key=lambda q: (len(q.variables), q.sort_key()))
        q = reduced[0]
        lin = [v for v in q.variables if q.degree(v) == 1]
        target = max(lin) if lin else max(q.variables)
        for v in q.variables:
            if v != target:
                point[v] = dyadic(rng, *cfg.range_for(v))
        q = q.partial_eval(point)
        if q.is_zero():
            pending = reduced[1:]
            continue
        if q.is_constant():
            return None
        roots = _univariate_roots(q, exact, width)
        if not roots:
            return None
        point[target] = roots[rng.randrange(len(roots))]
        pending = reduced[1:]
    for k in keys:
        if k not in point:
            point[k] = dyadic(rng, *cfg.range_for(k))
    return point


def grid_values(cfg: SampleConfig, v: Var) -> list[Fraction]:
    lo, hi = cfg.range_for(v)
    vals = [Fraction(0), Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 2), Fraction(2), Fraction(-2)]
    return [x for x in vals if lo <= x <= hi]


def structured_points(
    formulas: Sequence[Formula],
    keys: Sequence[Var],
    cfg: SampleConfig,
    budget: int,
    closure_depth: int | None = None,
    label: str = "structured",
) -> list[dict[Var, Fraction]]:
    """Points concentrated where the formulas' equations and atoms change truth.

    Three sources: a small grid of simple values, exact solutions of each DNF
    conjunct's equations (with their derivatives up to ``closure_depth`` in
    differential mode) and their dyadic neighbours, and rational roots of
    univariate slices of every atom polynomial.
    """
    out: list[dict[Var, Fraction]] = []
    seen: set = set()

    def add(p: Mapping[Var, Fraction]) -> None:
        key = tuple(p.get(k, Fraction(0)) for k in keys)
        if key not in seen and len(out) < budget:
            seen.add(key)
            out.append({k: p.get(k, Fraction(0)) for k in keys})

    grid = list(itertools.product(*(grid_values(cfg, k) for k in keys)))
    rng = cfg.rng(label, "grid")
    if len(grid) > budget // 3:
        grid = rng.sample(grid, budget // 3)
    for g in grid:
        add(dict(zip(keys, g)))

    systems: list[list[MPoly]] = []
    for f in formulas:
        for c in to_dnf(f):
            eqs = [a.poly for a in c if a.rel == EQ]
            if closure_depth is not None:
                eqs = [g for e in eqs for g in derivative_closure(e, closure_depth)]
            if eqs:
                systems.append(eqs)
    tries = max(4, budget // (3 * max(len(systems), 1)))
    step = Fraction(1, 256)
    for si, eqs in enumerate(systems):
        for t in range(tries):
            p = solve_system(eqs, keys, cfg, label, si, t)
            if p is None:
                continue
            add(p)
            k = keys[t % len(keys)] if keys else None
            if k is not None:
                add({**p, k: p[k] + step})
                add({**p, k: p[k] - step})

    atoms_polys = [q for f in formulas for q in polys(f)]
    t = 0
    while len(out) < budget and atoms_polys and t < budget:
        base = uniform_point(cfg, keys, label, "slice", t) if t % 2 else dict(zip(keys, grid[t % len(grid)])) if grid else uniform_point(cfg, keys, label, "slice", t)
        q = atoms_polys[t % len(atoms_polys)]
        vs = q.variables
        t += 1
        if not vs:
            continue
        v = vs[t % len(vs)]
        sl = q.partial_eval({k: x for k, x in base.items() if k != v})
        if sl.is_constant():
            continue
        for r in _univariate_roots(sl, True, Fraction(1, 2**20)):
            add({**base, v: r})
            add({**base, v: r + step})
            add({**base, v: r - step})
    return out


# --------------------------------------------------------------------------
# sampled set equality


def sets_equal_sampled(
    phi1: Formula,
    phi2: Formula,
    cfg: SampleConfig | None = None,
    keys: Sequence[Var] | None = None,
    differential: bool = False,
    extra_structure: Sequence[Formula] = (),
) -> Verdict:
    """Compare two formulas at ``count`` uniform points plus structured points.

    Any exact disagreement is a counterexample. In ``differential`` mode the
    formulas are read under jet semantics: only points that are consistent
    for every atom polynomial (see :func:`consistent`) are compared.
    """
    cfg = cfg or SampleConfig()
    fs = [phi1, phi2, *extra_structure]
    ks = tuple(keys) if keys is not None else tuple(sorted(set(variables(phi1)) | set(variables(phi2))))
    depth = None
    fam: list[MPoly] = []
    if differential:
        fam = [q for f in fs for q in polys(f)]
        depth = max((k[1] for k in ks), default=0) + 1
        ks = tuple(sorted(set(ks) | {(i, j) for i, _ in ks for j in range(depth + 1)}))
    pts = [uniform_point(cfg, ks, "uniform", k) for k in range(cfg.count)]
    pts += structured_points(fs, ks, cfg, cfg.count, closure_depth=depth)
    checked = skipped = 0
    for p in pts:
        if differential and not consistent(p, fam, depth):
            skipped += 1
            continue
        a, b = evaluate(phi1, p), evaluate(phi2, p)
        checked += 1
        if a != b:
            return Verdict(
                FAIL,
                [{"point": point_json(p), "left": a, "right": b}],
                "formulas disagree",
                {"checked": checked, "skipped": skipped},
            )
    return Verdict(PASS, [], "", {"checked": checked, "skipped": skipped})


# --------------------------------------------------------------------------
# closure comparison


@dataclass
class PointSet:
    """Sampled points of a set, with optional exact helpers.

    ``locate(p)`` tries to find a member of the set near ``p``; ``exclude(p,
    r)`` returns True when the set is certified to miss the sup-norm ball of
    radius ``r`` around ``p``.
    """

    points: list[dict[Var, Fraction]]
    locate: Callable[[Point], Point | None] | None = None
    exclude: Callable[[Point, Fraction], bool] | None = None
    name: str = ""


def _one_side(A: PointSet, B: PointSet, keys: Sequence[Var], eps: Fraction) -> tuple[list, list]:
    fails, unresolved = [], []
    e = float(eps)
    for a in A.points:
        if any(sup_distance(a, b, keys) <= e for b in B.points):
            continue
        if B.locate is not None:
            q = B.locate(a)
            if q is not None and sup_distance(a, q, keys) <= e:
                continue
        certified = B.exclude is not None and B.exclude(a, eps)
        if certified or B.locate is None:
            fails.append({"point": point_json(a), "missing_from": B.name, "certified": bool(certified)})
        else:
            unresolved.append({"point": point_json(a), "missing_from": B.name})
    return fails, unresolved


def closure_density_sampled(A: PointSet, B: PointSet, cfg: SampleConfig | None = None, keys: Sequence[Var] | None = None) -> Verdict:
    """Symmetric epsilon-net comparison of two sampled sets."""
    cfg = cfg or SampleConfig()
    if not A.points and not B.points:
        return Verdict(PASS, [], "both sets empty")
    if not A.points or not B.points:
        return Verdict(INCONCLUSIVE, [], "a point generator starved", {"a": len(A.points), "b": len(B.points)})
    ks = tuple(keys) if keys is not None else tuple(sorted(set(A.points[0]) & set(B.points[0])))
    f1, u1 = _one_side(A, B, ks, cfg.epsilon)
    f2, u2 = _one_side(B, A, ks, cfg.epsilon)
    stats = {"a": len(A.points), "b": len(B.points), "unresolved": len(u1) + len(u2)}
    if f1 or f2:
        return Verdict(FAIL, f1 + f2, "points without a close partner", stats)
    if u1 or u2:
        return Verdict(INCONCLUSIVE, u1 + u2, "search for close partners failed", stats)
    return Verdict(PASS, [], "", stats)


def ball(point: Point, keys: Iterable[Var], r: Fraction):
    from ..algebra.enclosure import Enclosure

    return {k: Enclosure(Fraction(point[k]) - r, Fraction(point[k]) + r) for k in keys}


def formula_excludes_ball(phi: Formula, point: Point, r: Fraction) -> bool:
    """Interval certificate that ``phi`` is false on the whole ball."""
    ks = variables(phi)
    if any(k not in point for k in ks):
        return False
    return evaluate_box(phi, ball(point, ks, r)) is False


# --------------------------------------------------------------------------
# dimension probe


def fiber_nonempty(phi: Formula, assign: Mapping[Var, Fraction], rest: Sequence[Var], cfg: SampleConfig, *stream) -> bool:
    """Whether some choice of the ``rest`` coordinates satisfies ``phi``.

    Exact for at most one free coordinate; with more, all but the last are
    tried on a small grid and at random, so False may be a miss.
    """
    from ..cells import truth_regions

    psi = map_polys(phi, lambda p: p.partial_eval(assign))
    if not rest:
        return evaluate(psi, {})
    *outer, last = rest
    choices: list[dict[Var, Fraction]] = [{}]
    if outer:
        rng = cfg.rng("fiber", *stream)
        grid = list(itertools.product(*(grid_values(cfg, v) for v in outer)))
        choices = [dict(zip(outer, g)) for g in grid]
        choices += [{v: dyadic(rng, *cfg.range_for(v)) for v in outer} for _ in range(16)]
    for ch in choices:
        chi = map_polys(psi, lambda p: p.partial_eval(ch)) if ch else psi
        if any(r.truth for r in truth_regions(chi, last)):
            return True
    return False


def dimension_probe(phi: Formula, cfg: SampleConfig | None = None, keys: Sequence[Var] | None = None) -> tuple[int, tuple[int, ...]]:
    """Estimate the dimension of the set defined by ``phi``.

    Returns ``(l, S)``: the largest ``l`` such that the projection onto the
    coordinates ``S`` (positions in ``keys``) contains a full grid of step
    ``epsilon`` around some sampled centre. The empty set gives ``(-1, ())``.
    """
    cfg = cfg or SampleConfig()
    ks = tuple(keys) if keys is not None else variables(phi)
    n = len(ks)
    if n > 4:
        raise ValueError("dimension probe is limited to at most 4 coordinates")
    eps = cfg.epsilon
    tries = max(8, min(cfg.count, 64))
    for ell in range(n, -1, -1):
        for S in itertools.combinations(range(n), ell):
            sk = [ks[i] for i in S]
            rest = [ks[i] for i in range(n) if i not in S]
            centres = [dict(zip(sk, g)) for g in itertools.product(*(grid_values(cfg, v) for v in sk))][:tries]
            centres += [uniform_point(cfg, sk, "dim", ell, S, t) for t in range(tries)]
            for ci, c in enumerate(centres):
                ok = True
                for off in itertools.product((-1, 0, 1), repeat=ell):
                    g = {v: c[v] + o * eps for v, o in zip(sk, off)}
                    if not fiber_nonempty(phi, g, rest, cfg, "dim", S, ci):
                        ok = False
                        break
                if ok:
                    return ell, S
    return -1, ()
