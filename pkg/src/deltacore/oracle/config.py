"""Sample points, sampling configuration and three-valued verdicts."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ..algebra.mpoly import Var

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def to_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12) if abs(x) < 1e12 else Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class JetPoint:
    """Values for the jet keys ``(i, j)`` with ``i < nvars`` and ``j <= depth``.

    ``coords`` is blocked per variable: block ``i`` holds d^0(x_i) .. d^depth(x_i).
    """

    coords: tuple[Fraction, ...]
    nvars: int = 1
    depth: int = 0

    def __post_init__(self):
        if len(self.coords) != self.nvars * (self.depth + 1):
            raise ValueError(
                f"expected {self.nvars * (self.depth + 1)} coordinates for "
                f"{self.nvars} block(s) of depth {self.depth}, got {len(self.coords)}"
            )
        object.__setattr__(self, "coords", tuple(to_fraction(c) for c in self.coords))

    @classmethod
    def from_mapping(cls, point: Mapping[Var, object], nvars: int, depth: int) -> JetPoint:
        return cls(
            tuple(point.get((i, j), 0) for i in range(nvars) for j in range(depth + 1)),
            nvars,
            depth,
        )

    def as_mapping(self) -> dict[Var, Fraction]:
        b = self.depth + 1
        return {(k // b, k % b): c for k, c in enumerate(self.coords)}

    def __getitem__(self, key: Var) -> Fraction:
        i, j = key
        if not (0 <= i < self.nvars and 0 <= j <= self.depth):
            raise KeyError(f"jet d^{j}(x{i}) outside block depth {self.depth}")
        return self.coords[i * (self.depth + 1) + j]

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coords]


def point_json(point: Mapping[Var, Fraction]) -> dict[str, str]:
    return {f"{i},{j}": str(Fraction(c)) for (i, j), c in sorted(point.items())}


@dataclass(frozen=True)
class SampleConfig:
    """Parameters shared by every sampled check.

    ``box`` is the default coordinate range; ``boxes`` overrides it per key.
    ``epsilon`` is both the closure tolerance and the default ball radius.
    """

    box: tuple[Fraction, Fraction] = (Fraction(-2), Fraction(2))
    count: int = 512
    seed: int = 20240917
    epsilon: Fraction = Fraction(1, 16)
    newton_tol: Fraction = Fraction(1, 10**12)
    max_iter: int = 40
    boxes: tuple[tuple[Var, Fraction, Fraction], ...] = ()

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be at least 1")
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "box", (Fraction(self.box[0]), Fraction(self.box[1])))
        object.__setattr__(self, "newton_tol", Fraction(self.newton_tol))
        if self.box[0] >= self.box[1]:
            raise ValueError("empty sampling box")

    def range_for(self, v: Var) -> tuple[Fraction, Fraction]:
        for key, lo, hi in self.boxes:
            if tuple(key) == tuple(v):
                return Fraction(lo), Fraction(hi)
        return self.box

    def rng(self, *stream: object) -> random.Random:
        """Independent deterministic generator for the given sub-stream label."""
        return random.Random(":".join(map(str, (self.seed, *stream))))

    def with_(self, **kw) -> SampleConfig:
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(kw)
        return SampleConfig(**data)

    def to_json(self) -> dict:
        return {
            "box": [str(self.box[0]), str(self.box[1])],
            "count": self.count,
            "seed": self.seed,
            "epsilon": str(self.epsilon),
            "newton_tol": str(self.newton_tol),
            "max_iter": self.max_iter,
        }


@dataclass
class Verdict:
    """Outcome of a checkable property: pass, fail or inconclusive."""

    status: str
    witnesses: list[dict] = field(default_factory=list)
    reason: str = ""
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (PASS, FAIL, INCONCLUSIVE):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == FAIL and not self.witnesses:
            raise ValueError("a fail verdict needs at least one counterexample")
        if self.status == INCONCLUSIVE and not self.reason:
            raise ValueError("an inconclusive verdict needs a reason")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "reason": self.reason,
            "stats": self.stats,
            "witnesses": self.witnesses,
        }


def combine(verdicts: Iterable[Verdict], reason: str = "") -> Verdict:
    """Fail if any fails, else inconclusive if any is, else pass."""
    vs = list(verdicts)
    fails = [w for v in vs if v.failed for w in v.witnesses]
    if fails:
        return Verdict(FAIL, fails, reason)
    inc = [v for v in vs if v.status == INCONCLUSIVE]
    if inc:
        return Verdict(INCONCLUSIVE, [w for v in inc for w in v.witnesses], reason or inc[0].reason)
    return Verdict(PASS, [], reason)


def dyadic(rng: random.Random, lo: Fraction, hi: Fraction, bits: int = 12) -> Fraction:
    """Uniform dyadic rational in ``[lo, hi]`` with ``bits`` bits of resolution."""
    n = 1 << bits
    return lo + (hi - lo) * Fraction(rng.randrange(n + 1), n)


def sup_distance(a: Mapping[Var, object], b: Mapping[Var, object], keys: Sequence[Var]) -> float:
    return max((abs(float(a[k]) - float(b[k])) for k in keys), default=0.0)
