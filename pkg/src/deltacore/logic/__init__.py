"""Quantifier-free formulas over the ordered-field signature and their normal forms."""

from .formula import (
    EQ,
    FALSE,
    GT,
    NE,
    TRUE,
    And,
    Atom,
    Formula,
    Or,
    conj,
    disj,
    eq,
    evaluate,
    evaluate_box,
    gt,
    jet_depth,
    ne,
    negate,
    to_dnf,
    var_count,
    variables,
)
from .normal import (
    NiceDisjunct,
    delta_nice_form,
    goodform_decompose,
    kolchin_decompose,
    lambda_formula,
    mk_Z,
    mk_Zcal,
    normalize_L,
    star_transform,
)

__all__ = [
    "EQ",
    "FALSE",
    "GT",
    "NE",
    "TRUE",
    "And",
    "Atom",
    "Formula",
    "NiceDisjunct",
    "Or",
    "conj",
    "delta_nice_form",
    "disj",
    "eq",
    "evaluate",
    "evaluate_box",
    "goodform_decompose",
    "gt",
    "jet_depth",
    "kolchin_decompose",
    "lambda_formula",
    "mk_Z",
    "mk_Zcal",
    "ne",
    "negate",
    "normalize_L",
    "star_transform",
    "to_dnf",
    "var_count",
    "variables",
]
