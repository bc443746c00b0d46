"""Normal forms: Zariski/Kolchin pieces, good-form splitting, nice disjuncts.

The splitting engine is a Euclid cascade. It keeps a system ``(A, R)``
meaning ``A = 0 and R != 0`` and repeatedly reduces the polynomials that
involve the distinguished variable against the one of lowest rank, branching
on whether the leading coefficient or separant used for the reduction
vanishes. Non-vanishing branches are emitted first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..algebra.mpoly import MPoly, Var, prod, pseudo_div
from ..diffpoly import DiffPoly, derive_poly, order_in, prolongations
from .formula import (
    EQ,
    GT,
    NE,
    TRUE,
    Atom,
    Formula,
    conj,
    eq,
    jet_depth,
    ne,
    to_dnf,
    var_count,
    variables,
)


def _p(x) -> MPoly:
    return x.poly if isinstance(x, DiffPoly) else x


def mk_Z(A: Iterable[MPoly], R: MPoly | int = 1) -> Formula:
    """``AND_{P in A} P = 0  AND  R != 0``."""
    R = _p(R) if not isinstance(R, int) else MPoly.const(R)
    if R.is_zero():
        raise ValueError("R = 0 defines the empty set")
    return conj(*(eq(_p(p)) for p in A), ne(R))


def mk_Zcal(A: Iterable[DiffPoly], R: DiffPoly | int = 1) -> Formula:
    """Differential counterpart of :func:`mk_Z`; jets are read as derivatives."""
    return mk_Z(A, R)


@dataclass(frozen=True)
class NiceDisjunct:
    """One disjunct ``Z_A^S and theta`` of a nice normal form."""

    equations: tuple[MPoly, ...]
    side: MPoly
    open_part: Formula = TRUE

    def formula(self) -> Formula:
        return conj(mk_Z(self.equations, self.side), self.open_part)

    def principal(self, y: Var | int) -> MPoly | None:
        """The unique equation involving ``y`` (a variable or a differential index)."""
        hits = [p for p in self.equations if _involves(p, y)]
        if len(hits) > 1:
            raise ValueError("more than one equation involves the distinguished variable")
        return hits[0] if hits else None


def _involves(p: MPoly, y: Var | int) -> bool:
    if isinstance(y, int):
        return order_in(p, y) >= 0
    return p.degree(y) > 0


# --------------------------------------------------------------------------
# star transform and lambda formulas


def star_transform(phi: Formula) -> tuple[Formula, int]:
    """Return ``(phi*, m)`` with ``m`` the syntactic jet depth of ``phi``.

    Jet keys and block coordinates coincide, so ``phi*`` reads the same tree
    in plain mode: d^j(x_i) becomes coordinate ``y_{i,j}`` of a block of
    length ``m + 1``.
    """
    return phi, jet_depth(phi)


def lambda_formula(P: DiffPoly, d: int, y: int | None = None) -> Formula:
    """``P* = 0, s_P* != 0`` and the first ``d`` separant-cleared prolongation equations."""
    y = P.nvars - 1 if y is None else y
    m = order_in(P, y)
    if m < 0:
        raise ValueError(f"undefined separant: x{y} does not occur")
    from ..diffpoly import separant

    s = separant(P, y).poly
    parts = [eq(P.poly), ne(s)]
    for i, f in enumerate(prolongations(P, d, y), start=1):
        lhs = f.separant_base.poly ** f.sep_power * MPoly.var((y, m + i)) - f.numerator.poly
        parts.append(eq(lhs))
    return conj(*parts)


# --------------------------------------------------------------------------
# the splitting engine


class _Ranking:
    """Ranking of polynomials with respect to the distinguished variable."""

    def __init__(self, y: Var | int):
        self.y = y
        self.differential = isinstance(y, int)

    def involves(self, p: MPoly) -> bool:
        return _involves(p, self.y)

    def leader(self, p: MPoly) -> Var:
        if self.differential:
            return (self.y, order_in(p, self.y))
        return self.y

    def rank(self, p: MPoly) -> tuple[int, int]:
        if not self.involves(p):
            return (-1, 0)
        u = self.leader(p)
        return (u[1] if self.differential else 0, p.degree(u))


def _normalize(A: Iterable[MPoly]) -> list[MPoly] | None:
    out: dict[MPoly, None] = {}
    for p in A:
        if p.is_zero():
            continue
        if p.is_constant():
            return None
        out[p.monic()] = None
    return sorted(out, key=lambda q: q.sort_key())


def _is_const(p: MPoly) -> bool:
    return p.is_constant()


def _times(R: MPoly, f: MPoly) -> MPoly:
    return R if f.is_constant() else R * f


def _drop_vanishing_initials(A: list[MPoly], rk: _Ranking) -> list[MPoly] | None:
    """Replace ``p`` by its reductum while its initial is itself one of the equations."""
    while True:
        members = set(A)
        for k, p in enumerate(A):
            if not rk.involves(p):
                continue
            u = rk.leader(p)
            I = p.lc(u)
            if not I.is_constant() and I.monic() in members:
                A = _normalize(A[:k] + [p - I * MPoly.var(u, p.degree(u))] + A[k + 1 :])
                if A is None:
                    return None
                break
        else:
            return A


def _split(A: list[MPoly], R: MPoly, rk: _Ranking, out: list[tuple[tuple[MPoly, ...], MPoly]]) -> None:
    if R.is_zero():
        return
    A = _normalize(A)
    if A is None:
        return
    if any(R.exact_div(p) is not None for p in A if not p.is_constant()):
        return
    A = _drop_vanishing_initials(A, rk)
    if A is None:
        return
    Ay = [p for p in A if rk.involves(p)]
    if not Ay:
        out.append((tuple(A), R))
        return
    key = lambda p: (rk.rank(p), p.sort_key())
    P = min(Ay, key=key)
    u = rk.leader(P)
    rest = [q for q in Ay if q != P]
    if rest:
        Q = max(rest, key=key)
        others = [p for p in A if p != Q]
        qu = rk.leader(Q)
        if rk.differential and qu[1] > u[1]:
            D = P
            for _ in range(qu[1] - u[1]):
                D = derive_poly(D)
            s = P.diff(u)
            _, _, r = pseudo_div(Q, D, qu)
            _split(others + [r], _times(R, s), rk, out)
            if not _is_const(s):
                _split(A + [s], R, rk, out)
        else:
            I = P.lc(u)
            _, _, r = pseudo_div(Q, P, u)
            _split(others + [r], _times(R, I), rk, out)
            if not _is_const(I):
                dP = P.degree(u)
                _split([p for p in A if p != P] + [I, P - I * MPoly.var(u, dP)], R, rk, out)
        return
    s = P.diff(u)
    if _is_const(s):
        out.append((tuple(A), R))
        return
    if R.exact_div(P) is None:
        out.append((tuple(A), R * s))
    if P.degree(u) == 1:
        _split([p for p in A if p != P] + [s, P - s * MPoly.var(u)], R, rk, out)
    else:
        _split(A + [s], R, rk, out)


def _dedup_pieces(pieces):
    seen, out = set(), []
    for B, S in pieces:
        k = (B, S)
        if k not in seen:
            seen.add(k)
            out.append((B, S))
    return out


def goodform_decompose(A: Iterable[MPoly], R: MPoly | int, y: Var) -> list[tuple[tuple[MPoly, ...], MPoly]]:
    """Split ``Z_A^R`` into pieces ``Z_B^S`` in good form with respect to ``y``.

    In each piece either no equation involves ``y``, or exactly one does,
    say ``P``, and ``dP/dy`` divides ``S``.
    """
    R = MPoly.const(R) if isinstance(R, int) else _p(R)
    if R.is_zero():
        raise ValueError("R = 0 defines the empty set")
    out: list = []
    _split([_p(a) for a in A], R, _Ranking(tuple(y)), out)
    return _dedup_pieces(out)


def kolchin_decompose(A: Iterable[DiffPoly | MPoly], R: DiffPoly | MPoly | int, y: int) -> list[tuple[tuple[MPoly, ...], MPoly]]:
    """Differential splitting of the Kolchin-locally-closed set ``Z_A^R``.

    Pieces have at most one equation of non-negative order in ``x_y``, whose
    separant divides the side polynomial.
    """
    R = MPoly.const(R) if isinstance(R, int) else _p(R)
    if R.is_zero():
        raise ValueError("R = 0 defines the empty set")
    out: list = []
    _split([_p(a) for a in A], R, _Ranking(int(y)), out)
    return _dedup_pieces(out)


def separant_witness(B: Sequence[MPoly], S: MPoly, y: Var | int) -> MPoly | None:
    """Exact quotient ``S / s_P`` for the principal equation ``P`` of a piece."""
    rk = _Ranking(y)
    hits = [p for p in B if rk.involves(p)]
    if len(hits) != 1:
        return None
    P = hits[0]
    return S.exact_div(P.diff(rk.leader(P)))


# --------------------------------------------------------------------------
# nice normal forms


def _conjunct_parts(c: list[Atom]) -> tuple[list[MPoly], MPoly, Formula]:
    A = [a.poly for a in c if a.rel == EQ]
    R = prod(a.poly for a in c if a.rel == NE)
    theta = conj(*(a for a in c if a.rel == GT))
    return A, R, theta


def _nice(phi: Formula, splitter, y) -> list[NiceDisjunct]:
    out: list[NiceDisjunct] = []
    seen = set()
    for c in to_dnf(phi):
        A, R, theta = _conjunct_parts(c)
        for B, S in splitter(A, R, y):
            d = NiceDisjunct(B, S, theta)
            if d not in seen:
                seen.add(d)
                out.append(d)
    return out


def last_variable(phi: Formula) -> Var:
    vs = variables(phi)
    if not vs:
        return (0, 0)
    return vs[-1]


def normalize_L(phi: Formula, y: Var | None = None) -> list[NiceDisjunct]:
    """Plain-mode nice form: disjuncts ``Z_A^S and theta`` in good form w.r.t. ``y``.

    ``y`` defaults to the largest coordinate occurring in ``phi``.
    """
    y = last_variable(phi) if y is None else tuple(y)
    return _nice(phi, goodform_decompose, y)


def delta_nice_form(phi: Formula, nvars: int | None = None) -> list[NiceDisjunct]:
    """Differential nice form with respect to the last differential variable.

    The open parts are the strict-inequality atoms of each DNF conjunct, read
    as conditions on the jets up to the order of ``phi``.
    """
    n = max(var_count(phi), 1) if nvars is None else nvars
    return _nice(phi, kolchin_decompose, n - 1)


def order_bounds_ok(pieces, A_orders: dict[int, int], y: int) -> bool:
    """Check the order bounds of the differential splitting on a list of pieces.

    ``A_orders`` maps each variable index to ``ord_{x_i}(A, R)``.
    """
    oy = A_orders.get(y, -1)
    for B, S in pieces:
        if order_in(S, y) > oy:
            return False
        for i, oi in A_orders.items():
            if i == y:
                continue
            if max(order_in(p, i) for p in (*B, S)) > oi + max(oy, 0):
                return False
        hits = [p for p in B if order_in(p, y) >= 0]
        if len(hits) > 1 or (hits and order_in(hits[0], y) > oy):
            return False
    return True
