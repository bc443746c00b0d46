"""Cells, delta-cells, exact decomposition of the line, and sampled cell checks.

Only the one-dimensional decomposition is computed. In higher dimension a
cell is supplied as a certificate (the set, its projection and claimed
correspondence multiplicity) and checked by sampling; the checks return
three-valued verdicts because continuity and openness are topological
statements that finite sampling can refute but never prove.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra.mpoly import MPoly, Var
from .algebra.univariate import (
    Interval,
    count_roots,
    from_dense,
    isolate_real_roots,
    peval,
    pgcd,
    pmul,
    refine,
    squarefree_part,
    to_dense,
    trim,
)
from .logic.formula import (
    FALSE,
    TRUE,
    Formula,
    conj,
    disj,
    eq,
    evaluate,
    gt,
    iter_atoms,
    map_polys,
    variables,
)
from .oracle.config import FAIL, INCONCLUSIVE, PASS, SampleConfig, Verdict, dyadic, point_json
from .parsing import format_formula, parse_formula

# --------------------------------------------------------------------------
# real algebraic points


@dataclass(frozen=True)
class AlgPoint1D:
    """A real algebraic number: an exact rational, or a root of ``poly`` isolated by ``interval``."""

    poly: tuple[Fraction, ...]
    interval: Interval

    @classmethod
    def rational(cls, r: Fraction) -> AlgPoint1D:
        r = Fraction(r)
        return cls((-r, Fraction(1)), Interval(r, r, False, False))

    @property
    def value(self) -> Fraction | None:
        return self.interval.lo if self.interval.is_point else None

    def approx(self, width: Fraction = Fraction(1, 2**40)) -> Fraction:
        if self.value is not None:
            return self.value
        return refine(list(self.poly), self.interval, width).midpoint

    def __float__(self) -> float:
        return float(self.approx())

    def sign_of(self, g: Sequence[Fraction]) -> int:
        """Exact sign of the univariate polynomial ``g`` at this point."""
        g = trim(list(g))
        if not g:
            return 0
        if self.value is not None:
            v = peval(g, self.value)
            return (v > 0) - (v < 0)
        f = list(self.poly)
        h = pgcd(f, g)
        lo, hi = self.interval.lo, self.interval.hi
        if len(h) > 1 and count_roots(h, lo, hi) >= 1:
            return 0
        gs = squarefree_part(g)
        iv = self.interval
        while count_roots(gs, iv.lo, iv.hi) > 0:
            iv = refine(f, iv, iv.width / 4)
            if iv.is_point:
                v = peval(g, iv.lo)
                return (v > 0) - (v < 0)
        v = peval(g, iv.midpoint)
        return (v > 0) - (v < 0)

    def to_json(self) -> dict:
        if self.value is not None:
            return {"value": str(self.value)}
        return {
            "poly": [str(c) for c in self.poly],
            "interval": [str(self.interval.lo), str(self.interval.hi)],
            "approx": repr(float(self)),
        }


def _point_formula(a: AlgPoint1D, v: Var) -> Formula:
    x = MPoly.var(v)
    if a.value is not None:
        return eq(x - a.value)
    f = from_dense(list(a.poly), v)
    return conj(gt(x - a.interval.lo), gt(a.interval.hi - x), eq(f))


def _greater_than(a: AlgPoint1D, v: Var) -> Formula:
    """``x > a`` as a quantifier-free formula."""
    x = MPoly.var(v)
    if a.value is not None:
        return gt(x - a.value)
    lo, hi = a.interval.lo, a.interval.hi
    f = from_dense(list(a.poly), v)
    sigma = 1 if peval(list(a.poly), hi) > 0 else -1
    return disj(gt(x - hi), eq(x - hi), conj(gt(x - lo), gt(hi - x), gt(f * sigma)))


def _less_than(a: AlgPoint1D, v: Var) -> Formula:
    x = MPoly.var(v)
    if a.value is not None:
        return gt(a.value - x)
    lo, hi = a.interval.lo, a.interval.hi
    f = from_dense(list(a.poly), v)
    sigma = 1 if peval(list(a.poly), lo) > 0 else -1
    return disj(gt(lo - x), eq(x - lo), conj(gt(x - lo), gt(hi - x), gt(f * sigma)))


# --------------------------------------------------------------------------
# sign partition of the line


@dataclass(frozen=True)
class Region:
    """A root (``point``) or the open gap between consecutive roots."""

    kind: str  # "root" or "gap"
    truth: bool
    point: AlgPoint1D | None = None
    left: AlgPoint1D | None = None
    right: AlgPoint1D | None = None
    sample: Fraction | None = None


def _univariate_atoms(phi: Formula, v: Var) -> list[list[Fraction]]:
    out = []
    for a in iter_atoms(phi):
        vs = a.poly.variables
        if any(w != v for w in vs):
            raise ValueError(f"formula is not univariate in {v}: mentions {vs}")
        _, dense = to_dense(a.poly)
        if len(dense) > 1:
            out.append(dense)
    return out


def _truth_at_point(phi: Formula, a: AlgPoint1D, v: Var, cache: dict) -> bool:
    from .logic.formula import EQ, NE, And, Atom, _Truth

    def rec(f: Formula) -> bool:
        if isinstance(f, _Truth):
            return f.value
        if isinstance(f, Atom):
            key = f.poly
            if key not in cache:
                cache[key] = a.sign_of(to_dense(f.poly)[1])
            s = cache[key]
            return s == 0 if f.rel == EQ else (s != 0 if f.rel == NE else s > 0)
        vals = [rec(g) for g in f.args]
        return all(vals) if isinstance(f, And) else any(vals)

    return rec(phi)


def truth_regions(phi: Formula, v: Var) -> list[Region]:
    """Exact truth of a univariate formula on each root and gap, left to right."""
    dense = _univariate_atoms(phi, v)
    f: list[Fraction] = [Fraction(1)]
    for d in dense:
        f = pmul(f, d)
    f = squarefree_part(f) if len(f) > 1 else f
    roots = isolate_real_roots(f) if len(f) > 1 else []
    pts: list[AlgPoint1D] = []
    for iv in roots:
        if iv.is_point:
            pts.append(AlgPoint1D.rational(iv.lo))
        else:
            # define the root by the first atom polynomial vanishing at it
            owner = f
            for d in dense:
                sd = squarefree_part(d)
                if count_roots(sd, iv.lo, iv.hi) == 1 and peval(sd, iv.hi) != 0:
                    owner = sd
                    break
            pts.append(AlgPoint1D(tuple(owner), iv))
    # separate neighbouring intervals so gap samples and endpoints avoid roots
    k = 0
    while k + 1 < len(pts):
        a, b = pts[k], pts[k + 1]
        if a.interval.hi < b.interval.lo:
            k += 1
            continue
        if not a.interval.is_point:
            pts[k] = AlgPoint1D(a.poly, refine(list(a.poly), a.interval, a.interval.width / 2))
        if not b.interval.is_point:
            pts[k + 1] = AlgPoint1D(b.poly, refine(list(b.poly), b.interval, b.interval.width / 2))
        k = max(k - 1, 0)
    regions: list[Region] = []
    for k in range(len(pts) + 1):
        left = pts[k - 1] if k > 0 else None
        right = pts[k] if k < len(pts) else None
        if left is None and right is None:
            s = Fraction(0)
        elif left is None:
            s = right.interval.lo - 1
        elif right is None:
            s = left.interval.hi + 1
        else:
            s = (left.interval.hi + right.interval.lo) / 2
        regions.append(Region("gap", evaluate(phi, {v: s}), left=left, right=right, sample=s))
        if right is not None:
            regions.append(Region("root", _truth_at_point(phi, right, v, {}), point=right))
    return regions


# --------------------------------------------------------------------------
# certificates


KINDS = ("open", "graph", "open-fiber")


@dataclass
class CellCertificate:
    """Claimed cell structure of a plain-mode set.

    ``rho`` lists positions in ``keys`` of the projection coordinates.
    ``kind`` is "open" (the set is open, rho is everything), "graph" (the
    set is the graph of a continuous ``mult``-valued correspondence over its
    open projection) or "open-fiber" (fibres over a base cell are open in
    the last coordinate).
    """

    set: Formula
    dim: int
    rho: tuple[int, ...]
    kind: str
    keys: tuple[Var, ...]
    base: CellCertificate | None = None
    mult: int = 1
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rho = tuple(self.rho)
        self.keys = tuple(tuple(k) for k in self.keys)
        if self.kind not in KINDS:
            raise ValueError(f"unknown cell kind {self.kind!r}")
        if list(self.rho) != sorted(set(self.rho)):
            raise ValueError("rho indices must be strictly increasing")
        if self.dim != len(self.rho):
            raise ValueError("dim must equal the number of projection coordinates")
        if any(not 0 <= r < len(self.keys) for r in self.rho):
            raise ValueError("rho index out of range")
        if self.kind == "open-fiber" and (not self.rho or self.rho[-1] != len(self.keys) - 1):
            raise ValueError("an open-fiber cell projects onto the last coordinate")

    @property
    def base_keys(self) -> tuple[Var, ...]:
        return tuple(self.keys[i] for i in self.rho)

    @property
    def fiber_keys(self) -> tuple[Var, ...]:
        return tuple(k for i, k in enumerate(self.keys) if i not in self.rho)

    def to_json(self) -> dict:
        return {
            "set": format_formula(self.set, "plain"),
            "dim": self.dim,
            "rho": list(self.rho),
            "kind": self.kind,
            "mult": self.mult,
            "keys": [list(k) for k in self.keys],
            "base": self.base.to_json() if self.base is not None else None,
            "data": self.data,
        }

    @classmethod
    def from_json(cls, obj: dict) -> CellCertificate:
        base = obj.get("base")
        return cls(
            parse_formula(obj["set"]),
            int(obj["dim"]),
            tuple(obj["rho"]),
            obj["kind"],
            tuple(tuple(k) for k in obj["keys"]),
            cls.from_json(base) if base else None,
            int(obj.get("mult", 1)),
            dict(obj.get("data", {})),
        )


@dataclass
class DeltaCellCertificate:
    """A differential set claimed to be the jet preimage of ``target_cell``."""

    set: Formula
    depth: int
    target_cell: CellCertificate
    nvars: int = 1

    def to_json(self) -> dict:
        return {
            "set": format_formula(self.set, "delta"),
            "depth": self.depth,
            "nvars": self.nvars,
            "target_cell": self.target_cell.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> DeltaCellCertificate:
        return cls(
            parse_formula(obj["set"]),
            int(obj["depth"]),
            CellCertificate.from_json(obj["target_cell"]),
            int(obj.get("nvars", 1)),
        )


# --------------------------------------------------------------------------
# one-dimensional decomposition


def decompose_1d(phi: Formula, v: Var | None = None) -> list[CellCertificate]:
    """Partition the subset of the line defined by ``phi`` into cells.

    Open intervals with real-algebraic (or infinite) endpoints come first in
    left-to-right order; the isolated points, if any, form one finite cell
    placed according to its leftmost point.
    """
    vs = variables(phi)
    if v is None:
        if len(vs) > 1:
            raise ValueError("decompose_1d needs a univariate formula")
        v = vs[0] if vs else (0, 0)
    v = tuple(v)
    regions = truth_regions(phi, v)
    opens: list[tuple[AlgPoint1D | None, AlgPoint1D | None, Fraction]] = []
    points: list[AlgPoint1D] = []
    k = 0
    while k < len(regions):
        r = regions[k]
        if not r.truth:
            k += 1
            continue
        j = k
        while j + 1 < len(regions) and regions[j + 1].truth:
            j += 1
        run = regions[k : j + 1]
        if run[0].kind == "root":
            points.append(run[0].point)
            run = run[1:]
        tail_point = None
        if run and run[-1].kind == "root":
            tail_point = run[-1].point
            run = run[:-1]
        if run:
            opens.append((run[0].left, run[-1].right, run[0].sample))
        if tail_point is not None:
            points.append(tail_point)
        k = j + 1
    cells: list[tuple[float, CellCertificate]] = []
    for left, right, sample in opens:
        f = conj(_greater_than(left, v) if left else TRUE, _less_than(right, v) if right else TRUE)
        data = {
            "left": left.to_json() if left else "-inf",
            "right": right.to_json() if right else "+inf",
            "sample": str(sample),
        }
        key = float(left) if left else float("-inf")
        cells.append((key, CellCertificate(f, 1, (0,), "open", (v,), None, 1, data)))
    if points:
        f = disj(*(_point_formula(p, v) for p in points))
        data = {"points": [p.to_json() for p in points]}
        key = min(float(p) for p in points)
        cells.append((key, CellCertificate(f, 0, (), "graph", (v,), None, len(points), data)))
    cells.sort(key=lambda t: t[0])
    return [c for _, c in cells]


def verify_decomposition_1d(phi: Formula, cells: Sequence[CellCertificate], v: Var | None = None) -> Verdict:
    """Exact check that ``cells`` are disjoint and cover ``phi`` on the line.

    Every root of every atom (of ``phi`` and of the cells) and every gap
    between consecutive roots, including the two unbounded ones, is tested
    by exact sign evaluation: exactly one cell must hold where ``phi`` holds
    and none elsewhere.
    """
    vs = variables(phi)
    v = tuple(v) if v is not None else (vs[0] if vs else (0, 0))
    everything = disj(phi, *(C.set for C in cells))
    bad = []
    for r in truth_regions(everything, v):
        if r.kind == "gap":
            truth = [evaluate(f, {v: r.sample}) for f in (phi, *(C.set for C in cells))]
            where = {"sample": str(r.sample)}
        else:
            truth = [_truth_at_point(f, r.point, v, {}) for f in (phi, *(C.set for C in cells))]
            where = {"root": r.point.to_json()}
        hits = sum(truth[1:])
        if hits != int(truth[0]):
            bad.append({**where, "phi": truth[0], "cells_holding": hits})
    if bad:
        return Verdict(FAIL, bad, "cells do not partition the set")
    return Verdict(PASS, [], "")


# --------------------------------------------------------------------------
# sampled checks


def _fiber(C: CellCertificate, base: Mapping[Var, Fraction]) -> list[Region] | None:
    """Truth regions of the fibre over ``base``; None when not one-dimensional."""
    rest = C.fiber_keys
    psi = map_polys(C.set, lambda p: p.partial_eval(base))
    if len(rest) == 0:
        return [Region("root", evaluate(psi, {}), point=AlgPoint1D.rational(Fraction(0)))]
    if len(rest) > 1:
        return None
    return truth_regions(psi, rest[0])


def _fiber_size(regions: list[Region]) -> float:
    if any(r.truth and r.kind == "gap" for r in regions):
        return float("inf")
    return sum(1 for r in regions if r.truth)


def _fiber_values(regions: list[Region]) -> list[float]:
    return [float(r.point) for r in regions if r.truth and r.kind == "root"]


def _last_fiber(C: CellCertificate, point: Mapping[Var, Fraction]) -> list[Region]:
    """Truth regions in the last coordinate once all others are fixed."""
    return truth_regions(map_polys(C.set, lambda p: p.partial_eval(point)), C.keys[-1])


def _fiber_info(C: CellCertificate, base: Mapping[Var, Fraction]) -> tuple[bool, float, list[tuple[float, ...]]] | None:
    """Nonemptiness, size and sorted points of the fibre of ``C`` over ``base``.

    Fibres in several coordinates are walked through the chain of base
    certificates (each adding one coordinate); this needs the intermediate
    fibre points to be rational. None means the fibre cannot be computed.
    """
    if len(C.fiber_keys) <= 1:
        regs = _fiber(C, base)
        if regs is None:
            return None
        return any(r.truth for r in regs), _fiber_size(regs), [(v,) for v in _fiber_values(regs)]
    B = C.base
    if B is None or B.keys != C.keys[:-1] or B.base_keys != C.base_keys:
        return None
    inner = _fiber_points(B, base)
    if inner is None:
        return None
    pts: list[tuple[float, ...]] = []
    for q in inner:
        regs = _last_fiber(C, {**base, **q})
        if any(r.truth and r.kind == "gap" for r in regs):
            return True, float("inf"), []
        pts.extend(tuple(float(q[k]) for k in B.fiber_keys) + (v,) for v in _fiber_values(regs))
    return bool(pts), float(len(pts)), sorted(pts)


def _fiber_points(C: CellCertificate, base: Mapping[Var, Fraction]) -> list[dict[Var, Fraction]] | None:
    """Exact rational fibre points of a finite-fibre cell, or None."""
    if len(C.fiber_keys) == 0:
        return [{}] if evaluate(map_polys(C.set, lambda p: p.partial_eval(base)), {}) else []
    if len(C.fiber_keys) == 1:
        regs = _fiber(C, base)
        out = []
        for r in regs:
            if r.truth:
                if r.kind == "gap" or r.point.value is None:
                    return None
                out.append({C.fiber_keys[0]: r.point.value})
        return out
    B = C.base
    if B is None or B.keys != C.keys[:-1] or B.base_keys != C.base_keys:
        return None
    inner = _fiber_points(B, base)
    if inner is None:
        return None
    out = []
    for q in inner:
        regs = _last_fiber(C, {**base, **q})
        for r in regs:
            if r.truth:
                if r.kind == "gap" or r.point.value is None:
                    return None
                out.append({**q, C.keys[-1]: r.point.value})
    return out


def _base_grid(c: Mapping[Var, Fraction], keys: Sequence[Var], h: Fraction):
    for off in itertools.product((-1, 0, 1), repeat=len(keys)):
        yield {k: c[k] + o * h for k, o in zip(keys, off)}


def check_cell(C: CellCertificate, cfg: SampleConfig | None = None) -> Verdict:
    """Sampled check of the cell axioms for ``C``.

    Base points are sampled in the projection; a base point whose
    epsilon-grid stays in the projection is interior. On interior points the
    fibre must have exactly ``mult`` elements (graph) or be open (open-fiber),
    and fibre values must move little between nearby base points. Samples
    next to the boundary of the projection are reported as flags only.
    """
    cfg = cfg or SampleConfig()
    bk = C.base_keys
    eps = cfg.epsilon
    if C.kind == "open":
        return _check_open(C, cfg)
    flags, fails, interior = [], [], 0
    target = max(4, min(cfg.count // 8, 48))
    attempts = 0
    centres: list[dict[Var, Fraction]] = []
    if not bk:
        centres = [{}]
    else:
        grid = [dict(zip(bk, g)) for g in itertools.product(*([Fraction(x, 4) for x in range(-8, 9)] for _ in bk))]
        rng = cfg.rng("cell", C.kind, C.rho)
        rng.shuffle(grid)
        centres = grid[: target]
        centres += [{k: dyadic(rng, *cfg.range_for(k)) for k in bk} for _ in range(4 * target)]
    uncounted = 0
    for c in centres:
        if interior >= target:
            break
        attempts += 1
        info = _fiber_info(C, c)
        if info is None:
            uncounted += 1
            continue
        nonempty, size, vals = info
        if not nonempty:
            continue
        inside = all((_fiber_info(C, g) or (False,))[0] for g in _base_grid(c, bk, eps))
        if not inside:
            flags.append({"base": point_json(c), "fiber_size": size, "note": "near the boundary of the projection"})
            continue
        interior += 1
        if C.kind == "graph":
            if size != C.mult:
                fails.append({"base": point_json(c), "fiber_size": size, "claimed": C.mult})
                continue
            # continuity probe
            if bk and vals:
                for g in _base_grid(c, bk, eps / 8):
                    other = _fiber_info(C, g)
                    ov = other[2] if other else []
                    if len(ov) == len(vals):
                        jump = max(max(abs(a - b) for a, b in zip(u, w)) for u, w in zip(vals, ov))
                        if jump > 1:
                            flags.append({"base": point_json(g), "jump": jump, "note": "possible discontinuity"})
        else:
            regs = _fiber(C, c) or []
            if any(r.truth and r.kind == "root" for r in regs):
                fails.append({"base": point_json(c), "note": "fibre has an isolated point"})
    stats = {"interior": interior, "flags": len(flags), "attempts": attempts, "uncounted": uncounted}
    if fails:
        return Verdict(FAIL, fails + flags, "fibre structure differs from the certificate", stats)
    if interior == 0 and uncounted:
        return Verdict(INCONCLUSIVE, flags, "fibres could not be computed exactly", stats)
    if interior == 0:
        return Verdict(INCONCLUSIVE, flags, "no interior base point found", stats)
    return Verdict(PASS, flags, "", stats)


def _check_open(C: CellCertificate, cfg: SampleConfig) -> Verdict:
    keys = C.keys
    rng = cfg.rng("open-cell", keys)
    found, fails = 0, []
    samples = [{k: dyadic(rng, *cfg.range_for(k)) for k in keys} for _ in range(cfg.count)]
    samples += cell_points(C, cfg)
    for p in samples:
        if not evaluate(C.set, p):
            continue
        found += 1
        h = cfg.epsilon
        for _ in range(30):
            if all(evaluate(C.set, g) for g in _base_grid(p, keys, h)):
                break
            h /= 2
        else:
            fails.append({"point": point_json(p), "note": "no open neighbourhood found down to 2^-30 epsilon"})
    recorded = C.data.get("sample")
    if recorded is not None and len(keys) == 1:
        p = {keys[0]: Fraction(recorded)}
        if not evaluate(C.set, p):
            fails.append({"point": point_json(p), "note": "recorded sample is outside the cell"})
        found += 1
    stats = {"samples_in_cell": found}
    if fails:
        return Verdict(FAIL, fails, "cell is not open at a sample", stats)
    if found == 0:
        return Verdict(INCONCLUSIVE, [], "no sample fell in the cell", stats)
    return Verdict(PASS, [], "", stats)


def check_subcell(C: CellCertificate, U: Formula) -> CellCertificate:
    """Certificate for the part of ``C`` lying over the open set ``U``."""
    bk = set(C.base_keys)
    extra = [v for v in variables(U) if v not in bk]
    if extra:
        raise ValueError(f"U mentions non-base coordinates {extra}")
    if U == TRUE:
        return C
    if U == FALSE:
        raise ValueError("empty cell")
    uv = variables(U)
    if len(uv) == 1 and not decompose_1d(U, uv[0]):
        raise ValueError("empty cell")
    base = check_subcell(C.base, U) if C.base is not None and set(uv) <= set(C.base.keys) else C.base
    return CellCertificate(conj(C.set, U), C.dim, C.rho, C.kind, C.keys, base, C.mult, dict(C.data))


def check_fiber_density(
    C: CellCertificate,
    a: Mapping[Var, Fraction],
    V: Mapping[Var, tuple[Fraction, Fraction]],
    cfg: SampleConfig | None = None,
) -> Verdict:
    """Search a neighbourhood ``U`` of the base of ``a`` whose points all have fibre points in ``V``.

    ``a`` must lie in the cell (checked exactly) and ``V`` is an open box
    around its fibre coordinates. Radii are halved from 1 until the check
    passes, then refined by dyadic bisection; the largest passing radius is
    reported in ``stats["u"]``.
    """
    cfg = cfg or SampleConfig()
    a = {tuple(k): Fraction(x) for k, x in a.items()}
    if not evaluate(C.set, a):
        raise ValueError("the point does not lie in the cell")
    bk, fk = C.base_keys, C.fiber_keys
    if not bk:
        return Verdict(PASS, [], "projection is a point", {"u": "inf"})
    for k in fk:
        lo, hi = V[k]
        if not lo < a[k] < hi:
            raise ValueError("V must be an open box around the fibre coordinates of a")
    if len(fk) > 1:
        return Verdict(INCONCLUSIVE, [], "fibres of dimension above one are not searched")
    x = MPoly.var(fk[0]) if fk else None
    box_formula = conj(*(conj(gt(x - V[k][0]), gt(V[k][1] - x)) for k in fk)) if fk else TRUE

    def ok(u: Fraction) -> bool:
        rng = cfg.rng("fiber-density", u)
        offs = [list(o) for o in itertools.product((-1, 0, 1), repeat=len(bk))]
        shrink = 1 - Fraction(1, 1024)
        tests = [{k: a[k] + o * u * shrink for k, o in zip(bk, off)} for off in offs]
        tests += [{k: a[k] + u * (2 * Fraction(rng.randrange(1025), 1024) - 1) * shrink for k in bk} for _ in range(32)]
        for b in tests:
            regs = _fiber(C, b)
            if not regs or not any(r.truth for r in regs):
                continue  # b outside the projection of C
            psi = conj(map_polys(C.set, lambda p: p.partial_eval(b)), box_formula)
            if fk and not any(r.truth for r in truth_regions(psi, fk[0])):
                return False
        return True

    u = Fraction(1)
    while not ok(u):
        u /= 2
        if u < Fraction(1, 2**30):
            return Verdict(FAIL, [{"point": point_json(a), "note": "no neighbourhood down to 2^-30"}], "fibre density fails")
    hi = 2 * u if u < 1 else u
    lo = u
    for _ in range(6):
        if hi == lo:
            break
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return Verdict(PASS, [], "", {"u": str(lo)})


# --------------------------------------------------------------------------
# delta-cells


def cell_points(C: CellCertificate, cfg: SampleConfig, count: int = 32) -> list[dict[Var, Fraction]]:
    """Exact points of a cell, found from its recorded one-dimensional data.

    Open cells built on one coordinate carry ``data["coord"]`` and a sample;
    graph cells are lifted from the rational points of their base chain.
    """
    rng = cfg.rng("cell-points", C.keys, C.kind)
    bottom = C
    while bottom.base is not None:
        bottom = bottom.base
    pts: list[dict[Var, Fraction]] = []
    if C.kind == "open":
        idx = C.data.get("coord")
        sample = C.data.get("sample")
        if idx is None or sample is None:
            return pts
        s0 = Fraction(sample)
        for t in range(4 * count):
            if len(pts) >= count:
                break
            p = {k: dyadic(rng, *cfg.range_for(k)) for k in C.keys}
            scale = Fraction(1, 2 ** rng.randrange(0, 6))
            p[C.keys[idx]] = s0 + scale * dyadic(rng, Fraction(-1), Fraction(1))
            if evaluate(C.set, p):
                pts.append(p)
        return pts
    bases: list[dict[Var, Fraction]] = []
    bk = C.base_keys
    if not bk:
        bases = [{}]
    elif len(bk) == 1 and bottom.data.get("sample") is not None:
        s0 = Fraction(bottom.data["sample"])
        bases = [{bk[0]: s0 + Fraction(1, 2 ** rng.randrange(0, 6)) * dyadic(rng, Fraction(-1), Fraction(1))} for _ in range(2 * count)]
    for b in bases:
        if len(pts) >= count:
            break
        fib = _fiber_points(C, b)
        for q in fib or []:
            p = {**b, **q}
            if evaluate(C.set, p):
                pts.append(p)
    return pts[:count]


def check_delta_cell(D: DeltaCellCertificate, cfg: SampleConfig | None = None) -> Verdict:
    """Check that ``D.set`` is the jet preimage of a cell with dense genuine jets.

    The preimage identity is checked exactly on sampled jets, the density
    of genuine jets in the target by the envelope density search, and the
    target itself with :func:`check_cell`. Points drawn from the cell
    certificate are added to the generic samples.
    """
    from .envelope import Envelope, density_check, preimage_check
    from .logic.formula import jet_depth
    from .logic.normal import delta_nice_form

    cfg = cfg or SampleConfig()
    order = jet_depth(D.set)
    if order > D.depth:
        raise ValueError("the set has jets above the certificate depth")
    E = Envelope(D.set, D.nvars, order, D.depth, D.target_cell.set, [], delta_nice_form(D.set, D.nvars))
    extra = cell_points(D.target_cell, cfg)
    parts = {
        "preimage": preimage_check(E, cfg, extra),
        "density": density_check(E, cfg, points=extra),
        "cell": check_cell(D.target_cell, cfg),
    }
    stats = {k: p.status for k, p in parts.items()}
    for name, v in parts.items():
        if v.failed:
            return Verdict(FAIL, v.witnesses, f"{name}: {v.reason}", stats)
    open_parts = [f"{name}: {v.reason}" for name, v in parts.items() if not v.passed]
    if open_parts:
        wit = [w for v in parts.values() if not v.passed for w in v.witnesses]
        return Verdict(INCONCLUSIVE, wit[:10], "; ".join(open_parts), stats)
    return Verdict(PASS, [], "", stats)


_OUT_OF_SCOPE = "requires general cell decomposition (out of scope)"


def _curve_jets(P: MPoly, d: int) -> list[MPoly] | None:
    """``r_1 .. r_d`` with ``y_i = r_i(y_0)`` along ``P = 0`` when ``P = c*y_1 - g(y_0)``."""
    y0, y1 = (0, 0), (0, 1)
    if any(v not in (y0, y1) for v in P.variables) or P.degree(y1) != 1:
        return None
    cs = P.coeffs_in(y1)
    if not cs[1].is_constant():
        return None
    r = [MPoly.var(y0), -cs.get(0, MPoly.const(0)).scale(1 / cs[1].constant_value())]
    while len(r) <= d:
        r.append(r[-1].diff(y0) * r[1])
    return r


def _stationary_points(B: CellCertificate, r1: MPoly) -> CellCertificate | None:
    """Restrict a finite cell of the line to the zeros of ``r1``.

    An element equal to an algebraic constant has derivative zero, so only
    the points where the curve's first jet vanishes carry differential points.
    """
    v = B.keys[0]
    _, dense = to_dense(r1)
    keep = [p for p in _cell_points_1d(B) if p.sign_of(dense) == 0]
    if not keep:
        return None
    f = disj(*(_point_formula(p, v) for p in keep))
    return CellCertificate(f, 0, (), "graph", B.keys, None, len(keep), {"points": [p.to_json() for p in keep]})


def _cell_points_1d(B: CellCertificate) -> list[AlgPoint1D]:
    regs = truth_regions(B.set, B.keys[0])
    return [r.point for r in regs if r.truth and r.kind == "root"]


def _lift_chain(B: CellCertificate, r: list[MPoly], keys: tuple[Var, ...]) -> CellCertificate:
    """Cells over ``B`` for the successive graphs ``y_i = r_i(y_0)``."""
    C = B
    f = B.set
    for i in range(1, len(keys)):
        f = conj(f, eq(MPoly.var(keys[i]) - r[i]))
        data = {"graph": [str(q) for q in r[1 : i + 1]]}
        C = CellCertificate(f, B.dim, B.rho, "graph", keys[: i + 1], C, B.mult, data)
    return C


def delta_decompose_1var(phi: Formula) -> list[DeltaCellCertificate]:
    """Delta-cells partitioning ``phi`` (one differential variable), when the target is univariate.

    Order zero reduces to :func:`decompose_1d`. Otherwise the envelope is
    split into open pieces defined through a single jet coordinate, and
    curve pieces ``c*y' = g(y)`` whose jets are polynomials in ``y_0``.
    Open pieces are handled first; each later piece is cut down by exact
    one-dimensional boolean algebra (on the shadow coordinate) so that the
    cells are disjoint.
    """
    from .envelope import build_envelope
    from .logic.formula import negate, var_count

    if var_count(phi) > 1:
        raise ValueError("delta_decompose_1var takes formulas in one differential variable")
    E = build_envelope(phi, 1)
    if E.order == 0:
        return [DeltaCellCertificate(C.set, 0, C, 1) for C in decompose_1d(phi, (0, 0))]
    d, keys = E.depth, E.keys
    opens, curves = [], []
    for nd, psi in zip(E.pieces, E.disjuncts):
        P = nd.principal(0)
        if P is None:
            vs = variables(psi)
            if len(vs) > 1 or nd.equations:
                raise ValueError(_OUT_OF_SCOPE)
            opens.append((nd, psi, vs[0] if vs else (0, 0)))
            continue
        r = _curve_jets(P, d)
        if r is None:
            raise ValueError(_OUT_OF_SCOPE)
        curves.append((nd, psi, r))
    out: list[DeltaCellCertificate] = []
    done_targets: list[Formula] = []
    done_sources: list[Formula] = []
    open_coord = None
    for nd, psi, c in opens:
        if open_coord is not None and c != open_coord and variables(psi):
            raise ValueError(_OUT_OF_SCOPE)
        open_coord = c if variables(psi) else open_coord
        cut = conj(psi, *(negate(t) for t in done_targets))
        idx = keys.index(c)
        for B in decompose_1d(cut, c):
            if B.kind != "open":
                # a jet coordinate pinned to a constant forces its successor to vanish
                raise ValueError(_OUT_OF_SCOPE)
            data = {**B.data, "coord": idx}
            Y = CellCertificate(B.set, len(keys), tuple(range(len(keys))), "open", keys, None, 1, data)
            out.append(DeltaCellCertificate(B.set, d, Y, 1))
        done_targets.append(psi)
        done_sources.append(nd.formula())
    for nd, psi, r in curves:
        sub = {(0, i): r[i] for i in range(1, d + 1)}
        cut = conj(psi, *(negate(t) for t in done_targets))
        shadow = map_polys(cut, lambda p: p.subs(sub))
        for B in decompose_1d(shadow, (0, 0)):
            if B.dim == 0:
                B = _stationary_points(B, r[1])
                if B is None:
                    continue
            Y = _lift_chain(B, r, keys)
            X = conj(nd.formula(), *(negate(t) for t in done_sources), B.set)
            out.append(DeltaCellCertificate(X, d, Y, 1))
        done_targets.append(psi)
        done_sources.append(nd.formula())
    return out
