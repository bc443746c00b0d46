"""Text grammar, pretty printer and canonical JSON for polynomials and formulas.

Polynomials::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*        # '/' only by constants
    factor := ('+' | '-') factor | power
    power  := atom ('^' INT)?
    atom   := NUMBER | VAR | 'd' ('^' INT)? '(' expr ')' | '(' expr ')' | '@' NAME

Variables are ``x<i>`` (the jet ``(i, 0)``), ``y<j>`` (coordinate ``(0, j)``)
and ``y<i>_<j>`` (coordinate ``(i, j)``). Formulas combine relations
``= != > < >= <=`` with ``&``, ``|``, ``!``, parentheses and ``true``/``false``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .algebra.mpoly import MPoly, Monomial, Var, mono_key
from .logic.formula import (
    EQ,
    FALSE,
    GT,
    NE,
    TRUE,
    And,
    Atom,
    Formula,
    Or,
    _Truth,
    atom,
    conj,
    disj,
    eq,
    gt,
    iter_atoms,
    ne,
    negate,
)


class ParseError(ValueError):
    """Syntax error carrying a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.message = message
        self.line = line
        self.column = column


# --------------------------------------------------------------------------
# printing


def rat_str(c: Fraction | int) -> str:
    """Exact rational string ``p/q`` (integers print without denominator)."""
    return str(Fraction(c))


def variable_scheme(vars_: Iterable[Var]) -> str:
    """Pick plain-mode names: ``x`` if all depths are 0, ``y`` if one block, else ``yij``."""
    vs = list(vars_)
    if all(j == 0 for _, j in vs):
        return "x"
    if all(i == 0 for i, _ in vs):
        return "y"
    return "yij"


def var_name(v: Var, mode: str = "delta", scheme: str = "yij") -> str:
    i, j = v
    if mode == "delta":
        if j == 0:
            return f"x{i}"
        if j == 1:
            return f"d(x{i})"
        return f"d^{j}(x{i})"
    if scheme == "x" and j == 0:
        return f"x{i}"
    if scheme == "y" and i == 0:
        return f"y{j}"
    return f"y{i}_{j}"


def _mono_str(m: Monomial, mode: str, scheme: str) -> str:
    parts = []
    for v, e in sorted(m, reverse=True):
        name = var_name(v, mode, scheme)
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def format_poly(p: MPoly, mode: str = "plain", scheme: str | None = None) -> str:
    """Canonical text of ``p``; terms in decreasing graded order."""
    if scheme is None:
        scheme = variable_scheme(p.variables)
    if p.is_zero():
        return "0"
    out = []
    for m, c in sorted(p.items(), key=lambda t: mono_key(t[0]), reverse=True):
        neg = c < 0
        a = -c if neg else c
        if not m:
            body = rat_str(a)
        elif a == 1:
            body = _mono_str(m, mode, scheme)
        else:
            body = f"{rat_str(a)}*{_mono_str(m, mode, scheme)}"
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


_REL_TEXT = {EQ: "=", NE: "!=", GT: ">"}


def formula_scheme(f: Formula) -> str:
    return variable_scheme(v for a in iter_atoms(f) for v in a.poly.variables)


def format_formula(f: Formula, mode: str = "delta", scheme: str | None = None) -> str:
    if scheme is None:
        scheme = formula_scheme(f)
    if isinstance(f, _Truth):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f"{format_poly(f.poly, mode, scheme)} {_REL_TEXT[f.rel]} 0"
    if isinstance(f, And):
        return " & ".join(
            f"({format_formula(a, mode, scheme)})" if isinstance(a, Or) else format_formula(a, mode, scheme)
            for a in f.args
        )
    if isinstance(f, Or):
        return " | ".join(format_formula(a, mode, scheme) for a in f.args)
    raise TypeError(f)


def formula_to_json(f: Formula, mode: str = "delta") -> dict:
    """Canonical JSON tree ``{kind, children, rel, poly, mode}``."""
    scheme = formula_scheme(f)

    def rec(g: Formula) -> dict:
        if isinstance(g, _Truth):
            return {"kind": "true" if g.value else "false"}
        if isinstance(g, Atom):
            return {"kind": "atom", "rel": g.rel, "poly": format_poly(g.poly, mode, scheme)}
        kind = "and" if isinstance(g, And) else "or"
        return {"kind": kind, "children": [rec(a) for a in g.args]}

    return {"mode": mode, "tree": rec(f)}


def formula_from_json(obj: Mapping) -> Formula:
    def rec(node: Mapping) -> Formula:
        kind = node["kind"]
        if kind == "true":
            return TRUE
        if kind == "false":
            return FALSE
        if kind == "atom":
            return atom(parse_poly(node["poly"]), node["rel"])
        children = [rec(c) for c in node["children"]]
        return conj(*children) if kind == "and" else disj(*children)

    return rec(obj["tree"])


# --------------------------------------------------------------------------
# lexing

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<var>y\d+_\d+|[xy]\d+)
  | (?P<ref>@[A-Za-z_][A-Za-z0-9_]*)
  | (?P<kw>true\b|false\b|d(?![A-Za-z0-9_]))
  | (?P<op>:=|!=|>=|<=|[-+*/^()=<>&|!])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, col0 = 0, 1, 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if mt is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = mt.lastgroup
        if kind == "nl":
            line += 1
            col0 = mt.end()
        elif kind != "ws":
            toks.append(Token(kind, mt.group(), line, pos - col0 + 1))
        pos = mt.end()
    toks.append(Token("eof", "", line, pos - col0 + 1))
    return toks


def _parse_var(text: str) -> Var:
    if text.startswith("x"):
        return (int(text[1:]), 0)
    if "_" in text:
        i, j = text[1:].split("_")
        return (int(i), int(j))
    return (0, int(text[1:]))


# --------------------------------------------------------------------------
# parsing


class _Parser:
    def __init__(self, text: str, env: Mapping[str, object] | None = None):
        self.toks = tokenize(text)
        self.i = 0
        self.env = dict(env or {})

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        t = tok or self.tok
        if t.kind == "eof":
            msg = f"{msg} (unexpected end of input)"
        return ParseError(msg, t.line, t.column)

    def accept(self, text: str) -> Token | None:
        if self.tok.text == text and self.tok.kind in ("op", "kw"):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            raise self.error(f"expected {text!r}")
        return t

    def done(self) -> None:
        if self.tok.kind != "eof":
            raise self.error(f"unexpected token {self.tok.text!r}")

    # polynomials
    def expr(self) -> MPoly:
        p = self.term()
        while True:
            if self.accept("+"):
                p = p + self.term()
            elif self.accept("-"):
                p = p - self.term()
            else:
                return p

    def term(self) -> MPoly:
        p = self.factor()
        while True:
            if self.accept("*"):
                p = p * self.factor()
            elif self.tok.text == "/" and self.tok.kind == "op":
                t = self.tok
                self.i += 1
                q = self.factor()
                if not q.is_constant() or q.is_zero():
                    raise self.error("division only by nonzero constants", t)
                p = p.scale(1 / q.constant_value())
            else:
                return p

    def factor(self) -> MPoly:
        if self.accept("-"):
            return -self.factor()
        if self.accept("+"):
            return self.factor()
        return self.power()

    def _int(self) -> int:
        t = self.tok
        if t.kind != "num" or "." in t.text:
            raise self.error("expected a non-negative integer exponent")
        self.i += 1
        return int(t.text)

    def power(self) -> MPoly:
        base = self.atom()
        if self.accept("^"):
            base = base ** self._int()
        return base

    def atom(self) -> MPoly:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return MPoly.const(Fraction(t.text))
        if t.kind == "var":
            self.i += 1
            return MPoly.var(_parse_var(t.text))
        if t.kind == "ref":
            self.i += 1
            val = self.env.get(t.text[1:])
            if not isinstance(val, MPoly):
                raise self.error(f"undefined polynomial name {t.text!r}", t)
            return val
        if t.kind == "kw" and t.text == "d":
            from .diffpoly import derive_poly

            self.i += 1
            k = self._int() if self.accept("^") else 1
            self.expect("(")
            p = self.expr()
            self.expect(")")
            for _ in range(k):
                p = derive_poly(p)
            return p
        if self.accept("("):
            p = self.expr()
            self.expect(")")
            return p
        raise self.error("expected a polynomial")

    # formulas
    def formula(self) -> Formula:
        f = self.conjunction()
        while self.accept("|"):
            f = disj(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.accept("&"):
            f = conj(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.accept("!"):
            return negate(self.unary())
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        t = self.tok
        if t.kind == "ref" and isinstance(self.env.get(t.text[1:]), Formula):
            self.i += 1
            return self.env[t.text[1:]]
        if t.text == "(" and t.kind == "op":
            save = self.i
            self.i += 1
            try:
                f = self.formula()
                self.expect(")")
                if self.tok.kind in ("eof",) or self.tok.text in ("&", "|", ")"):
                    return f
            except ParseError:
                pass
            self.i = save
        return self.relation()

    def relation(self) -> Formula:
        lhs = self.expr()
        t = self.tok
        ops = {"=", "!=", ">", "<", ">=", "<="}
        if t.kind != "op" or t.text not in ops:
            raise self.error("expected a relation (=, !=, >, <, >=, <=)")
        self.i += 1
        rhs = self.expr()
        diff = lhs - rhs
        if t.text == "=":
            return eq(diff)
        if t.text == "!=":
            return ne(diff)
        if t.text == ">":
            return gt(diff)
        if t.text == "<":
            return gt(-diff)
        if t.text == ">=":
            return disj(gt(diff), eq(diff))
        return disj(gt(-diff), eq(diff))


def parse_poly(text: str, env: Mapping[str, object] | None = None) -> MPoly:
    p = _Parser(text, env)
    out = p.expr()
    p.done()
    return out


def parse_dpoly(text: str, nvars: int | None = None, env: Mapping[str, object] | None = None):
    """Parse a differential polynomial; ``nvars`` defaults to the largest index + 1."""
    from .diffpoly import DiffPoly

    poly = parse_poly(text, env)
    try:
        return DiffPoly(poly, nvars)
    except ValueError as exc:
        raise ParseError(f"arity error: {exc}", 1, 1) from None


def parse_formula(text: str, env: Mapping[str, object] | None = None) -> Formula:
    p = _Parser(text, env)
    out = p.formula()
    p.done()
    return out


_DEF = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:=\s*(.*)$")


def parse_definitions(text: str) -> dict[str, object]:
    """Read a corpus file of ``name := expression`` lines.

    Blank lines and ``#`` comments are skipped. Each right-hand side is read
    as a formula when it contains a relation, otherwise as a polynomial, and
    may refer to earlier names with ``@name``.
    """
    env: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        mt = _DEF.match(line)
        if mt is None:
            raise ParseError("expected 'name := expression'", lineno, 1)
        name, body = mt.groups()
        col = line.index(body) if body else len(line)
        try:
            try:
                env[name] = parse_poly(body, env)
            except ParseError:
                env[name] = parse_formula(body, env)
        except ParseError as exc:
            raise ParseError(exc.message, lineno, col + exc.column) from None
    return env

