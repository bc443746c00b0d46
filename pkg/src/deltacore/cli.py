"""Command-line front end: ``deltacore <subcommand> [options]``.

Every subcommand prints one JSON object with sorted keys::

    {"command": ..., "input": ..., "result": ..., "verdicts": [...], "config": ...}

Exit codes: 0 on success or pass, 1 when some verdict fails, 2 on usage or
parse errors, 3 on I/O errors. Rationals are written as ``"p/q"`` strings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from .cells import (
    CellCertificate,
    DeltaCellCertificate,
    check_cell,
    check_delta_cell,
    decompose_1d,
    delta_decompose_1var,
    verify_decomposition_1d,
)
from .diffpoly import DiffPoly, leader, order_in, prolong, ritt_reduce, separant
from .envelope import (
    build_envelope,
    closure_projection_check,
    density_check,
    finiteness_bound,
    linked_triple_1var,
    preimage_check,
)
from .logic.formula import EQ, GT, NE, Formula, jet_depth, to_dnf, var_count, variables
from .logic.normal import (
    NiceDisjunct,
    delta_nice_form,
    goodform_decompose,
    kolchin_decompose,
    lambda_formula,
    normalize_L,
    star_transform,
)
from .oracle.config import FAIL, SampleConfig, Verdict
from .oracle.newton import dl_premise_check
from .oracle.sampling import dimension_probe
from .parsing import ParseError, format_formula, format_poly, parse_definitions, parse_formula, parse_poly
from .suites import SUITES, run_suite

CONFIG_ENV = "DELTACORE_CONFIG"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    """Bad arguments or input that does not fit the subcommand."""


# --------------------------------------------------------------------------
# configuration


def _rat(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None


def _box(text: str) -> tuple[Fraction, Fraction]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--box expects 'lo,hi', got {text!r}")
    return _rat(parts[0]), _rat(parts[1])


def load_config(args: argparse.Namespace) -> SampleConfig:
    """Defaults, then the JSON file named by ``$DELTACORE_CONFIG``, then flags."""
    data: dict = {}
    path = os.environ.get(CONFIG_ENV)
    if path:
        raw = json.loads(Path(path).read_text())
        if not isinstance(raw, dict):
            raise UsageError(f"{path}: config must be a JSON object")
        data.update(raw)
    flags = {
        "box": args.box,
        "count": args.samples,
        "seed": args.seed,
        "epsilon": args.epsilon,
        "newton_tol": args.newton_tol,
        "max_iter": args.max_iter,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    kw: dict = {}
    for key, value in data.items():
        if key == "box":
            kw["box"] = _box(value) if isinstance(value, str) else tuple(_rat(str(x)) for x in value)
        elif key in ("epsilon", "newton_tol"):
            kw[key] = _rat(str(value))
        elif key in ("count", "seed", "max_iter"):
            kw[key] = int(value)
        elif key == "samples":
            kw["count"] = int(value)
        else:
            raise UsageError(f"unknown config key {key!r}")
    try:
        return SampleConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --------------------------------------------------------------------------
# inputs


def _env(args: argparse.Namespace) -> dict:
    if not getattr(args, "file", None) or _is_json_file(args):
        return {}
    return parse_definitions(Path(args.file).read_text())


def _pick(args: argparse.Namespace, env: dict, inline: str | None, want: str):
    """The inline expression, else ``--def`` (or the last definition) of ``--file``."""
    if inline is not None:
        return inline, (parse_formula(inline, env) if want == "formula" else parse_poly(inline, env))
    if not env:
        raise UsageError(f"missing --{want} or --file")
    name = args.defn or list(env)[-1]
    if name not in env:
        raise UsageError(f"no definition named {name!r} in {args.file}")
    value = env[name]
    if want == "formula" and not isinstance(value, Formula):
        raise UsageError(f"{name!r} is a polynomial, a formula is needed")
    if want == "poly" and isinstance(value, Formula):
        raise UsageError(f"{name!r} is a formula, a polynomial is needed")
    return f"{args.file}:{name}", value


def _dpoly(args, env, text=None):
    label, p = _pick(args, env, text if text is not None else args.poly, "poly")
    return label, DiffPoly(p)


def _formula(args, env):
    return _pick(args, env, args.formula, "formula")


def _is_delta(phi: Formula, mode: str | None) -> bool:
    # jets and block coordinates share keys; any positive jet index reads as delta
    if mode is not None:
        return mode == "delta"
    return any(j > 0 for _, j in variables(phi))


# --------------------------------------------------------------------------
# rendering helpers


def _poly(p, mode: str = "delta") -> str:
    return format_poly(p.poly if isinstance(p, DiffPoly) else p, mode)


def _pieces_json(pieces: Sequence[NiceDisjunct], mode: str) -> list[dict]:
    return [
        {
            "equations": [_poly(a, mode) for a in nd.equations],
            "side": _poly(nd.side, mode),
            "open": format_formula(nd.open_part, mode),
        }
        for nd in pieces
    ]


def _zariski_parts(phi: Formula) -> tuple[list, object]:
    """``(A, R)`` for a single conjunct of equations and inequations."""
    cs = to_dnf(phi)
    if len(cs) != 1 or any(a.rel == GT for a in cs[0]):
        raise UsageError("expected a conjunction of '=' and '!=' atoms")
    A = [a.poly for a in cs[0] if a.rel == EQ]
    R = 1
    for a in cs[0]:
        if a.rel == NE:
            R = a.poly * R
    return A, R


def _load_json(args) -> object:
    if not args.file:
        raise UsageError("--file with a JSON certificate is required")
    return json.loads(Path(args.file).read_text())


# --------------------------------------------------------------------------
# subcommands: each returns (input, result, verdicts)


def cmd_prolong(args, cfg, env):
    label, P = _dpoly(args, env)
    if args.i < 1:
        raise UsageError("--i must be at least 1")
    f = prolong(P, args.i)
    result = {
        "i": args.i,
        "numerator": _poly(f.numerator),
        "separant": _poly(f.separant_base),
        "ell": f.sep_power,
        "leader": _poly(DiffPoly.jet(*leader(P), P.nvars)),
    }
    return label, result, []


def cmd_separant(args, cfg, env):
    label, P = _dpoly(args, env)
    y = P.nvars - 1
    if order_in(P, y) < 0:
        raise UsageError(f"x{y} does not occur, the separant is undefined")
    result = {
        "separant": _poly(separant(P)),
        "leader": _poly(DiffPoly.jet(*leader(P), P.nvars)),
        "order": order_in(P, y),
    }
    return label, result, []


def cmd_reduce(args, cfg, env):
    label, Q = _dpoly(args, env)
    plabel, P = _dpoly(args, env, args.by)
    r = ritt_reduce(Q, P)
    ok = r.verify()
    result = {
        "sep_power": r.sep_power,
        "init_power": r.init_power,
        "remainder": _poly(r.rem),
        "in_ideal": r.rem.poly.is_zero(),
    }
    v = Verdict("pass") if ok else Verdict(FAIL, [{"note": "cofactor identity does not expand"}], "replay failed")
    return {"poly": label, "by": plabel}, result, [("identity", v)]


def cmd_star(args, cfg, env):
    label, phi = _formula(args, env)
    star, m = star_transform(phi)
    return label, {"formula": format_formula(star, "plain", "yij" if var_count(phi) > 1 else "y"), "m": m}, []


def cmd_lambda(args, cfg, env):
    label, P = _dpoly(args, env)
    if args.d < 0:
        raise UsageError("--d must be non-negative")
    f = lambda_formula(P, args.d)
    return label, {"d": args.d, "formula": format_formula(f, "plain", "yij" if P.nvars > 1 else "y")}, []


def _split_cmd(splitter, mode):
    def run(args, cfg, env):
        label, phi = _formula(args, env)
        A, R = _zariski_parts(phi)
        if mode == "plain":
            y = tuple(int(t) for t in args.var.split(",")) if args.var else max(variables(phi), default=(0, 0))
        else:
            y = int(args.var) if args.var else max(var_count(phi), 1) - 1
        pieces = splitter(A, R, y)
        out = [{"equations": [_poly(b, mode) for b in B], "side": _poly(S, mode)} for B, S in pieces]
        return label, {"variable": list(y) if isinstance(y, tuple) else y, "pieces": out}, []

    return run


def cmd_niceform(args, cfg, env):
    label, phi = _formula(args, env)
    if _is_delta(phi, args.mode):
        return label, {"mode": "delta", "pieces": _pieces_json(delta_nice_form(phi), "delta")}, []
    return label, {"mode": "plain", "pieces": _pieces_json(normalize_L(phi), "plain")}, []


def cmd_envelope(args, cfg, env):
    label, phi = _formula(args, env)
    E = build_envelope(phi)
    result = E.to_json()
    result["finiteness_bound"] = finiteness_bound(E)
    verdicts = [("preimage", preimage_check(E, cfg))]
    if not args.no_density:
        verdicts.append(("density", density_check(E, cfg)))
    return label, result, verdicts


def cmd_linked(args, cfg, env):
    label, phi = _formula(args, env)
    T = linked_triple_1var(phi)
    m = args.m if args.m is not None else max(jet_depth(phi), T.m // 2)
    result = {**T.to_json(), "check_depth": m}
    verdicts = [("preimage", preimage_check(T.envelope, cfg))] if T.envelope is not None else []
    verdicts.append(("closure_projection", closure_projection_check(T, m, cfg)))
    return label, result, verdicts


def cmd_decompose1d(args, cfg, env):
    label, phi = _formula(args, env)
    if len(variables(phi)) > 1:
        raise UsageError("decompose1d takes a formula in one coordinate")
    cells = decompose_1d(phi)
    verdicts = [("partition", verify_decomposition_1d(phi, cells))]
    if args.check:
        verdicts += [(f"cell[{k}]", check_cell(C, cfg)) for k, C in enumerate(cells)]
    return label, {"cells": [C.to_json() for C in cells]}, verdicts


def cmd_delta_decompose(args, cfg, env):
    label, phi = _formula(args, env)
    cells = delta_decompose_1var(phi)
    verdicts = [(f"delta_cell[{k}]", check_delta_cell(D, cfg)) for k, D in enumerate(cells)] if args.check else []
    return label, {"cells": [D.to_json() for D in cells]}, verdicts


def _certificates(args, env, loader, from_formula):
    if args.formula is not None or not _is_json_file(args):
        label, phi = _formula(args, env)
        return label, from_formula(phi)
    obj = _load_json(args)
    if isinstance(obj, dict) and isinstance(obj.get("result"), dict):
        obj = obj["result"]
    items = obj if isinstance(obj, list) else obj.get("cells", [obj]) if isinstance(obj, dict) else None
    if items is None:
        raise UsageError("expected a certificate object or a list of them")
    try:
        return args.file, [loader(c) for c in items]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed certificate: {exc}") from None


def _is_json_file(args) -> bool:
    return bool(args.file) and str(args.file).endswith(".json")


def cmd_check_cell(args, cfg, env):
    label, cells = _certificates(args, env, CellCertificate.from_json, decompose_1d)
    verdicts = [(f"cell[{k}]", check_cell(C, cfg)) for k, C in enumerate(cells)]
    return label, {"cells": len(cells)}, verdicts


def cmd_check_delta_cell(args, cfg, env):
    label, cells = _certificates(args, env, DeltaCellCertificate.from_json, delta_decompose_1var)
    verdicts = [(f"delta_cell[{k}]", check_delta_cell(D, cfg)) for k, D in enumerate(cells)]
    return label, {"cells": len(cells)}, verdicts


def cmd_dl_check(args, cfg, env):
    label, P = _dpoly(args, env)
    v = dl_premise_check(P, cfg)
    return label, {"poly": _poly(P)}, [("dl", v)]


def cmd_dim_probe(args, cfg, env):
    label, phi = _formula(args, env)
    dim, coords = dimension_probe(phi, cfg)
    keys = variables(phi)
    return label, {"dimension": dim, "coordinates": [list(keys[i]) for i in coords]}, []


def cmd_suite(args, cfg, env):
    names = sorted(SUITES) if args.name == "all" else [args.name]
    reports = [run_suite(n, args.cases, args.seed if args.seed is not None else 7, cfg if _cfg_overridden(args) else None) for n in names]
    verdicts = []
    for r in reports:
        if r.status == "pass":
            verdicts.append((r.name, Verdict("pass", stats={"summary": f"{r.passed}/{r.cases}"})))
        elif r.status == "fail":
            verdicts.append((r.name, Verdict(FAIL, r.failures or [{"note": "see report"}], f"{r.failed} failing case(s)")))
        else:
            verdicts.append((r.name, Verdict("inconclusive", [], f"{r.inconclusive} inconclusive case(s)")))
    result = reports[0].to_json() if len(reports) == 1 else {"suites": [r.to_json() for r in reports]}
    return {"name": args.name, "cases": args.cases, "seed": args.seed if args.seed is not None else 7}, result, verdicts


def _cfg_overridden(args) -> bool:
    return any(getattr(args, k) is not None for k in ("box", "samples", "epsilon", "newton_tol", "max_iter")) or bool(
        os.environ.get(CONFIG_ENV)
    )


COMMANDS: dict[str, tuple[Callable, str]] = {
    "prolong": (cmd_prolong, "rational prolongation Q_i / s^ell along P"),
    "separant": (cmd_separant, "separant and leader of P"),
    "reduce": (cmd_reduce, "Ritt reduction of --poly modulo --by"),
    "star": (cmd_star, "plain-mode reading of a differential formula"),
    "lambda": (cmd_lambda, "the lambda formula of P at depth --d"),
    "goodform": (_split_cmd(goodform_decompose, "plain"), "good-form splitting of a locally Zariski closed set"),
    "kolchin": (_split_cmd(kolchin_decompose, "delta"), "differential splitting of a locally Kolchin closed set"),
    "niceform": (cmd_niceform, "nice normal form of a formula"),
    "envelope": (cmd_envelope, "envelope of a differential formula with its checks"),
    "linked": (cmd_linked, "linked triple of a one-variable formula"),
    "decompose1d": (cmd_decompose1d, "exact cell decomposition of a one-coordinate formula"),
    "delta-decompose": (cmd_delta_decompose, "delta-cell decomposition in one differential variable"),
    "check-cell": (cmd_check_cell, "check cell certificates"),
    "check-delta-cell": (cmd_check_delta_cell, "check delta-cell certificates"),
    "dl-check": (cmd_dl_check, "premise check of the genericity scheme for P"),
    "dim-probe": (cmd_dim_probe, "numeric dimension estimate of a plain formula"),
    "suite": (cmd_suite, "run a bundled verification suite"),
}


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("sampling")
    g.add_argument("--box", help="default coordinate range 'lo,hi'")
    g.add_argument("--samples", type=int, help="sample count")
    g.add_argument("--seed", type=int, help="random seed")
    g.add_argument("--epsilon", help="closure tolerance and ball radius")
    g.add_argument("--newton-tol", dest="newton_tol", help="Newton stopping tolerance")
    g.add_argument("--max-iter", dest="max_iter", type=int, help="Newton iteration cap")
    o = common.add_argument_group("input and output")
    o.add_argument("--file", help="definitions file (name := expr) or JSON certificate")
    o.add_argument("--def", dest="defn", help="definition to use from --file (default: the last)")
    o.add_argument("--format", choices=("json", "text"), default="json")
    o.add_argument("--output", help="write to this path instead of stdout")

    parser = argparse.ArgumentParser(prog="deltacore", description="Exact differential-algebra toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        if name in ("prolong", "separant", "reduce", "lambda", "dl-check"):
            p.add_argument("--poly", help="differential polynomial")
        else:
            p.add_argument("--formula", help="quantifier-free formula")
        if name == "prolong":
            p.add_argument("--i", type=int, default=1, help="prolongation index (>= 1)")
        if name == "reduce":
            p.add_argument("--by", required=True, help="the divisor P")
        if name == "lambda":
            p.add_argument("--d", type=int, default=1, help="number of prolongations")
        if name in ("goodform", "kolchin"):
            p.add_argument("--var", help="distinguished variable ('i,j' for goodform, an index for kolchin)")
        if name == "niceform":
            p.add_argument("--mode", choices=("plain", "delta"))
        if name == "envelope":
            p.add_argument("--no-density", action="store_true", help="skip the sampled density check")
        if name == "linked":
            p.add_argument("--m", type=int, help="depth of the closure comparison")
        if name in ("decompose1d", "delta-decompose"):
            p.add_argument("--check", action="store_true", help="also check every emitted certificate")
        if name == "suite":
            p.add_argument("--name", dest="name", required=True, choices=sorted(SUITES) + ["all"])
            p.add_argument("--cases", type=int, help="number of cases (suite default when omitted)")
    return parser


# --------------------------------------------------------------------------
# running


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (tuple, set, frozenset)):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default, ensure_ascii=False) + "\n"


def _text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines += _text(v, indent + 1)
            else:
                lines.append(f"{pad}{k}: {json.dumps(v, default=_json_default) if not isinstance(v, str) else v}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines += _text(v, indent + 1)
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{obj}")
    return lines


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(doc)
    head = [f"command: {doc['command']}"]
    for v in doc["verdicts"]:
        head.append(f"verdict {v['name']}: {v['status']}" + (f" ({v['reason']})" if v["reason"] else ""))
    return "\n".join(head + ["result:"] + _text(doc["result"], 1)) + "\n"


def run(argv: Sequence[str] | None = None) -> tuple[int, str, str]:
    """Execute one command; returns ``(exit code, stdout text, stderr text)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_OK if exc.code == 0 else EXIT_USAGE), "", ""
    fn = COMMANDS[args.command][0]
    try:
        cfg = load_config(args)
        env = _env(args)
        inp, result, verdicts = fn(args, cfg, env)
    except ParseError as exc:
        return EXIT_USAGE, "", f"deltacore {args.command}: {exc}\n"
    except (UsageError, ValueError, KeyError) as exc:
        return EXIT_USAGE, "", f"deltacore {args.command}: {exc}\n"
    except OSError as exc:
        return EXIT_IO, "", f"deltacore {args.command}: {exc}\n"
    doc = {
        "command": args.command,
        "input": inp,
        "result": result,
        "verdicts": [{"name": n, **v.to_json()} for n, v in verdicts],
        "config": cfg.to_json(),
    }
    code = EXIT_FAIL if any(v.failed for _, v in verdicts) else EXIT_OK
    text = render(doc, args.format)
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as exc:
            return EXIT_IO, "", f"deltacore {args.command}: {exc}\n"
        return code, "", ""
    return code, text, ""


def main(argv: Sequence[str] | None = None) -> int:
    code, out, err = run(argv)
    if out:
        sys.stdout.write(out)
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
