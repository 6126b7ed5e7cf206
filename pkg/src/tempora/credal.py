"""Belief/plausibility bounds for a proof-step assertion and the contradiction penalty.

Focal elements are the realizable joint labelings of the extracted pairs,
each with equal mass. Pairs that were never asserted are left vacuous.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from . import allen
from .errors import InvalidEpsilon, SizeExceeded
from .network import EventGraph

MAX_FOCAL = 20000


@dataclass(frozen=True)
class CredalInterval:
    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValueError(f"invalid credal interval [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_json(self) -> list[float]:
        return [self.lower, self.upper]


CONTRADICTION = CredalInterval(0.0, 0.0)


@dataclass(frozen=True)
class Assertion:
    edge: tuple[str, str]
    relations: int

    def __post_init__(self):
        if not self.relations:
            raise ValueError("an assertion needs a non-empty relation set")


@lru_cache(maxsize=1 << 17)
def feasible_relations(labeling: tuple, edge: tuple[str, str]) -> int:
    """Basics ``b`` such that ``labeling`` plus ``edge = b`` is realizable.

    ``labeling`` is a sorted tuple of ``((src, dst), basic)`` items.
    """
    fixed = dict(labeling)
    a, b = edge
    if (a, b) in fixed:
        return 1 << fixed[(a, b)]
    if (b, a) in fixed:
        return 1 << allen.converse_basic(fixed[(b, a)])
    if a == b:
        return 1 << allen.EQUALS
    out = 0
    for r in range(allen.K):
        fixed[(a, b)] = r
        if allen.realize((), fixed) is not None:
            out |= 1 << r
    return out


@lru_cache(maxsize=1 << 15)
def _realizable(labeling: tuple) -> bool:
    return allen.realize((), dict(labeling)) is not None


def focal_elements(g: EventGraph) -> list[tuple]:
    """Realizable joint labelings of the extracted pairs."""
    keys = sorted(g.extracted, key=lambda k: (g.vertices.index(k[0]), g.vertices.index(k[1])))
    domains = [allen.basics(g.extracted_label(*k)) for k in keys]
    size = 1
    for d in domains:
        size *= len(d)
    if size > MAX_FOCAL:
        raise SizeExceeded(f"{size} candidate focal elements exceeds {MAX_FOCAL}")
    out = []
    for combo in itertools.product(*domains):
        labeling = tuple(sorted(zip(keys, combo)))
        if _realizable(labeling):
            out.append(labeling)
    return out


def credal_support(g: EventGraph, a: Assertion, focal: list[tuple] | None = None) -> CredalInterval:
    """Lower/upper support of ``a`` given the extracted assertions of ``g``."""
    x, y = a.edge
    g.label(x, y)
    if focal is None:
        focal = focal_elements(g)
    if not focal:
        return CONTRADICTION
    lower = upper = 0
    for labeling in focal:
        feasible = feasible_relations(labeling, (x, y))
        if feasible & a.relations:
            upper += 1
            if not feasible & ~a.relations:
                lower += 1
    n = len(focal)
    return CredalInterval(lower / n, upper / n)


def phi_penalty(ci: CredalInterval, epsilon: float = 0.1, mode: str = "gated") -> float:
    """Contradiction penalty ``max(0, epsilon - width)``.

    ``gated`` only charges intervals whose upper bound sits below 0.5, so
    fully entailed steps ([1, 1]) are not penalized.
    """
    if not 0.0 < epsilon <= 1.0:
        raise InvalidEpsilon(f"epsilon must lie in (0, 1], got {epsilon!r}")
    if mode not in ("literal", "gated"):
        raise ValueError(f"unknown phi mode {mode!r}")
    value = max(0.0, epsilon - (ci.upper - ci.lower))
    if mode == "gated" and ci.upper >= 0.5:
        return 0.0
    return value
