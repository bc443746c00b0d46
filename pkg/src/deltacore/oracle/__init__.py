"""Sampling semantics over the reals: evaluation, Newton searches, verdicts."""

from .config import FAIL, INCONCLUSIVE, PASS, JetPoint, SampleConfig, Verdict, combine
from .newton import RegularZero, dl_premise_check, krawczyk, newton_regular_zero
from .sampling import (
    PointSet,
    closure_density_sampled,
    consistent,
    dimension_probe,
    eval_at,
    formula_excludes_ball,
    sets_equal_sampled,
    solve_system,
    structured_points,
)

__all__ = [
    "FAIL",
    "INCONCLUSIVE",
    "PASS",
    "JetPoint",
    "PointSet",
    "RegularZero",
    "SampleConfig",
    "Verdict",
    "closure_density_sampled",
    "combine",
    "consistent",
    "dimension_probe",
    "dl_premise_check",
    "eval_at",
    "formula_excludes_ball",
    "krawczyk",
    "newton_regular_zero",
    "sets_equal_sampled",
    "solve_system",
    "structured_points",
]
