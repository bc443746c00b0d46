"""Quantifier-free formulas over the ordered-field signature.

Atoms are ``p = 0``, ``p != 0`` and ``p > 0`` for a polynomial ``p`` over jet
keys ``(i, j)``. The same tree serves both modes: read in differential mode,
key ``(i, j)`` is d^j(x_i); in plain mode it is the block coordinate
``y_{i,j}``. Negation never appears in the tree; :func:`negate` pushes it
into the atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Union

from ..algebra.enclosure import Enclosure, enclose
from ..algebra.mpoly import MPoly, Var

EQ, NE, GT = "=", "!=", ">"
RELATIONS = (EQ, NE, GT)


class Formula:
    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return conj(self, other)

    def __or__(self, other: Formula) -> Formula:
        return disj(self, other)

    def __invert__(self) -> Formula:
        return negate(self)


@dataclass(frozen=True)
class _Truth(Formula):
    value: bool

    def __repr__(self) -> str:
        return "TRUE" if self.value else "FALSE"


TRUE = _Truth(True)
FALSE = _Truth(False)


@dataclass(frozen=True)
class Atom(Formula):
    poly: MPoly
    rel: str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")

    def holds(self, value: Fraction) -> bool:
        if self.rel == EQ:
            return value == 0
        if self.rel == NE:
            return value != 0
        return value > 0


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


QfFormula = Union[Atom, And, Or, _Truth]


def atom(p: MPoly, rel: str) -> Formula:
    """Build an atom, folding constant polynomials to TRUE/FALSE."""
    if p.is_constant():
        return TRUE if Atom(p, rel).holds(p.constant_value()) else FALSE
    return Atom(p, rel)


def eq(p: MPoly) -> Formula:
    return atom(p, EQ)


def ne(p: MPoly) -> Formula:
    return atom(p, NE)


def gt(p: MPoly) -> Formula:
    return atom(p, GT)


def _flatten(kind, args: Iterable[Formula]) -> list[Formula]:
    out: list[Formula] = []
    seen: set = set()
    for a in args:
        parts = a.args if isinstance(a, kind) else (a,)
        for b in parts:
            if b not in seen:
                seen.add(b)
                out.append(b)
    return out


def conj(*args: Formula) -> Formula:
    parts = _flatten(And, args)
    if FALSE in parts:
        return FALSE
    parts = [p for p in parts if p != TRUE]
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(tuple(parts))


def disj(*args: Formula) -> Formula:
    parts = _flatten(Or, args)
    if TRUE in parts:
        return TRUE
    parts = [p for p in parts if p != FALSE]
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(tuple(parts))


def negate(f: Formula) -> Formula:
    if isinstance(f, _Truth):
        return FALSE if f.value else TRUE
    if isinstance(f, Atom):
        if f.rel == EQ:
            return ne(f.poly)
        if f.rel == NE:
            return eq(f.poly)
        return disj(gt(-f.poly), eq(f.poly))
    if isinstance(f, And):
        return disj(*(negate(a) for a in f.args))
    if isinstance(f, Or):
        return conj(*(negate(a) for a in f.args))
    raise TypeError(f)


def iter_atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from iter_atoms(a)


def polys(f: Formula) -> list[MPoly]:
    out, seen = [], set()
    for a in iter_atoms(f):
        if a.poly not in seen:
            seen.add(a.poly)
            out.append(a.poly)
    return out


def variables(f: Formula) -> tuple[Var, ...]:
    return tuple(sorted({v for p in polys(f) for v in p.variables}))


def jet_depth(f: Formula) -> int:
    """Largest derivative depth ``j`` over all keys; 0 for variable-free formulas."""
    return max((v[1] for v in variables(f)), default=0)


def var_count(f: Formula) -> int:
    return max((v[0] for v in variables(f)), default=-1) + 1


def map_polys(f: Formula, fn: Callable[[MPoly], MPoly]) -> Formula:
    if isinstance(f, Atom):
        return atom(fn(f.poly), f.rel)
    if isinstance(f, And):
        return conj(*(map_polys(a, fn) for a in f.args))
    if isinstance(f, Or):
        return disj(*(map_polys(a, fn) for a in f.args))
    return f


def evaluate(f: Formula, point: Mapping[Var, Fraction]) -> bool:
    """Exact truth value at a rational point."""
    if isinstance(f, _Truth):
        return f.value
    if isinstance(f, Atom):
        return f.holds(Fraction(f.poly.eval(point)))
    if isinstance(f, And):
        return all(evaluate(a, point) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, point) for a in f.args)
    raise TypeError(f)


def evaluate_box(f: Formula, box: Mapping[Var, object]) -> bool | None:
    """Three-valued truth over a box (None when interval signs are inconclusive).

    ``=`` atoms are only decided when their enclosure is exactly ``{0}`` or
    excludes zero.
    """
    if isinstance(f, _Truth):
        return f.value
    if isinstance(f, Atom):
        enc: Enclosure = enclose(f.poly, box)
        s = enc.sign()
        if f.rel == EQ:
            if s == 0:
                return True
            return False if s is not None else None
        if f.rel == NE:
            if s == 0:
                return False
            return True if s is not None else None
        if s is None:
            return None
        return s > 0
    vals = [evaluate_box(a, box) for a in f.args]
    if isinstance(f, And):
        if any(v is False for v in vals):
            return False
        return None if any(v is None for v in vals) else True
    if any(v is True for v in vals):
        return True
    return None if any(v is None for v in vals) else False


def to_dnf(f: Formula) -> list[list[Atom]]:
    """Disjunctive normal form as a list of atom conjunctions.

    ``[]`` is FALSE and ``[[]]`` is TRUE.
    """
    if isinstance(f, _Truth):
        return [[]] if f.value else []
    if isinstance(f, Atom):
        return [[f]]
    if isinstance(f, Or):
        out: list[list[Atom]] = []
        for a in f.args:
            out.extend(to_dnf(a))
        return _dedup(out)
    acc: list[list[Atom]] = [[]]
    for a in f.args:
        sub = to_dnf(a)
        acc = [c + [x for x in d if x not in c] for c in acc for d in sub]
    return _dedup(acc)


def _dedup(cs: list[list[Atom]]) -> list[list[Atom]]:
    seen, out = set(), []
    for c in cs:
        key = frozenset(c)
        if key not in seen:
            seen.add(key)
            out.append(c)
    return out


def from_dnf(cs: list[list[Atom]]) -> Formula:
    return disj(*(conj(*c) for c in cs))


def is_open_syntax(f: Formula) -> bool:
    """True when every atom is a strict inequality (so the set is open)."""
    return all(a.rel in (GT, NE) for a in iter_atoms(f))
