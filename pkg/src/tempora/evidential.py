"""Dirichlet evidence over the 13 Allen relations and the evidence-provider contract."""

from __future__ import annotations

import json
import logging
import math
import random
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass
from functools import lru_cache
from typing import Protocol, Sequence

from scipy.special import digamma, gammaln

from . import allen
from .errors import InvalidAlpha

log = logging.getLogger(__name__)

K = allen.K
RULE_EVIDENCE = 50.0
HEDGED_EVIDENCE = 5.0


@dataclass(frozen=True)
class DirichletEvidence:
    alpha: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        _check(self.alpha)

    @classmethod
    def vacuous(cls, k: int = K) -> "DirichletEvidence":
        return cls((1.0,) * k)

    @classmethod
    def concentrated(cls, relations: int, evidence: float) -> "DirichletEvidence":
        """Evidence ``evidence`` on each proposed basic relation, 1 elsewhere."""
        return cls(tuple(evidence if relations >> i & 1 else 1.0 for i in range(K)))

    @property
    def total(self) -> float:
        return math.fsum(self.alpha)

    def fuse(self, other: "DirichletEvidence") -> "DirichletEvidence":
        """Cumulative fusion: evidence counts (alpha - 1) add."""
        return DirichletEvidence(tuple(a + b - 1.0 for a, b in zip(self.alpha, other.alpha)))

    def to_json(self) -> list[float]:
        return list(self.alpha)


def _check(alpha: Sequence[float]) -> None:
    if len(alpha) < 2:
        raise InvalidAlpha("need at least two concentration parameters")
    for a in alpha:
        if not (a > 0 and math.isfinite(a)):
            raise InvalidAlpha(f"concentration parameters must be positive and finite, got {a!r}")


def _alpha(d) -> tuple[float, ...]:
    if isinstance(d, DirichletEvidence):
        return d.alpha
    alpha = tuple(float(a) for a in d)
    _check(alpha)
    return alpha


@lru_cache(maxsize=4096)
def _entropy(alpha: tuple[float, ...]) -> float:
    k = len(alpha)
    a0 = math.fsum(alpha)
    log_b = math.fsum(gammaln(a) for a in alpha) - gammaln(a0)
    return float(
        log_b + (a0 - k) * digamma(a0) - math.fsum((a - 1.0) * digamma(a) for a in alpha)
    )


def dirichlet_entropy(d) -> float:
    """Differential entropy of Dir(alpha); accepts any dimension >= 2."""
    return _entropy(_alpha(d))


def vacuity(d) -> float:
    alpha = _alpha(d)
    return len(alpha) / math.fsum(alpha)


@dataclass(frozen=True)
class EpistemicConfig:
    measure: str = "vacuity"
    s_max: float = 100.0

    def __post_init__(self):
        if self.measure not in ("vacuity", "normalized_entropy"):
            raise ValueError(f"unknown epistemic measure {self.measure!r}")
        if not (math.isfinite(self.s_max) and self.s_max > K):
            raise ValueError("s_max must be finite and exceed the number of relations")


def normalized_epistemic(d, cfg: EpistemicConfig = EpistemicConfig()) -> float:
    alpha = _alpha(d)
    if cfg.measure == "vacuity":
        # concentrations below 1 would push K / sum past 1
        return min(1.0, len(alpha) / math.fsum(alpha))
    k = len(alpha)
    h_hi = _entropy((1.0,) * k)
    h_lo = _entropy((cfg.s_max / k,) * k)
    x = (_entropy(alpha) - h_lo) / (h_hi - h_lo)
    return min(1.0, max(0.0, x))


# -- providers ----------------------------------------------------------------


class EvidenceProvider(Protocol):
    name: str

    def propose(self, statement) -> tuple[int, DirichletEvidence]:
        """Relation set (oriented event -> other) and evidence for a relation statement."""


class RuleBasedProvider:
    name = "rule_based"

    def propose(self, statement):
        rel = statement.relation_mask()
        evidence = HEDGED_EVIDENCE if statement.hedged else RULE_EVIDENCE
        return rel, DirichletEvidence.concentrated(rel, evidence)


class NoisyProvider:
    """Seeded corruption of the rule-based reading.

    With probability ``p_flip`` the proposed relation moves to a conceptual
    neighbour. Evidence shrinks by the corruption ``rate``; flipped readings
    shrink by it a second time so vacuity tracks the injected error.
    """

    name = "noisy"

    def __init__(self, seed: int = 0, p_flip: float = 0.15, rate: float = 0.5):
        if not (0.0 <= p_flip <= 1.0 and 0.0 <= rate < 1.0):
            raise ValueError("p_flip must lie in [0,1] and rate in [0,1)")
        self.seed = seed
        self.p_flip = p_flip
        self.rate = rate

    def propose(self, statement):
        rel = statement.relation_mask()
        rng = random.Random(f"{self.seed}|{statement.render()}|{statement.source}")
        evidence = (HEDGED_EVIDENCE if statement.hedged else RULE_EVIDENCE) * (1.0 - self.rate)
        if rng.random() < self.p_flip:
            (r,) = allen.basics(rel) if bin(rel).count("1") == 1 else (rng.choice(allen.basics(rel)),)
            options = allen.basics(allen.NEIGHBOURS[r])
            rel = 1 << rng.choice(options)
            evidence *= 1.0 - self.rate
        return rel, DirichletEvidence.concentrated(rel, max(evidence, 1.0))


class RemoteProvider:
    """HTTP extractor; any failure degrades to the rule-based reading.

    Request: ``{"sentence": str, "events": [ids]}``; response:
    ``{"relations": [names], "alpha": [13 floats]}``.
    """

    name = "remote"

    def __init__(self, endpoint: str, timeout_ms: int = 2000):
        self.endpoint = endpoint
        self.timeout_ms = timeout_ms
        self.fallback = RuleBasedProvider()
        self._lock = threading.Lock()

    def propose(self, statement):
        body = json.dumps(
            {"sentence": statement.render(), "events": [statement.event, statement.other]}
        ).encode()
        req = urllib.request.Request(
            self.endpoint, data=body, headers={"Content-Type": "application/json"}, method="POST"
        )
        try:
            with self._lock:
                with urllib.request.urlopen(req, timeout=self.timeout_ms / 1000) as resp:
                    if resp.status != 200:
                        raise ValueError(f"status {resp.status}")
                    payload = json.loads(resp.read())
            rel = allen.from_names(payload["relations"])
            if not rel:
                raise ValueError("empty relation set")
            alpha = payload["alpha"]
            if len(alpha) != K:
                raise ValueError(f"expected {K} concentrations, got {len(alpha)}")
            return rel, DirichletEvidence(alpha)
        except (OSError, ValueError, KeyError, TypeError, urllib.error.URLError) as exc:
            log.warning("remote extractor failed (%s); using rule-based reading", exc)
            return self.fallback.propose(statement)
