"""Exact rationals, sparse polynomials, real roots and truncated power series."""

from .mpoly import MPoly, pseudo_div
from .series import TruncSeries, hensel_lift, hensel_lift_steps
from .univariate import Interval, isolate_real_roots

__all__ = [
    "Interval",
    "MPoly",
    "TruncSeries",
    "hensel_lift",
    "hensel_lift_steps",
    "isolate_real_roots",
    "pseudo_div",
]
