"""Step-level inconsistency signal, continuity penalty and discounted trace aggregate."""

from __future__ import annotations

from dataclasses import dataclass, field

from .credal import CredalInterval, phi_penalty
from .errors import EmptyTrace
from .evidential import DirichletEvidence, EpistemicConfig, normalized_epistemic

NONE = "none"
EPISTEMIC = "epistemic_dominant"
CREDAL = "credal_dominant"


@dataclass(frozen=True)
class PISConfig:
    beta: float = 0.5
    gamma: float = 0.9
    epsilon: float = 1.0
    tau: float = 0.35
    lambda_psi: float = 0.05
    phi_mode: str = "gated"
    epistemic: EpistemicConfig = field(default_factory=EpistemicConfig)

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.lambda_psi < 0:
            raise ValueError("lambda_psi must be non-negative")
        if self.phi_mode not in ("literal", "gated"):
            raise ValueError(f"unknown phi_mode {self.phi_mode!r}")


@dataclass(frozen=True)
class StepSignal:
    l_inc: float
    epistemic_term: float
    credal_term: float
    credal: CredalInterval

    def to_json(self) -> dict:
        return {
            "l_inc": self.l_inc,
            "epistemic": self.epistemic_term,
            "credal_term": self.credal_term,
            "credal": self.credal.to_json(),
        }


@dataclass(frozen=True)
class TraceSignal:
    j_pis: float
    per_step: tuple[StepSignal, ...]
    psi_terms: tuple[float, ...]


def step_inconsistency(ci: CredalInterval, d: DirichletEvidence, cfg: PISConfig) -> StepSignal:
    epistemic = normalized_epistemic(d, cfg.epistemic)
    credal = phi_penalty(ci, cfg.epsilon, cfg.phi_mode)
    l_inc = cfg.beta * epistemic + (1.0 - cfg.beta) * credal
    return StepSignal(l_inc, epistemic, credal, ci)


def continuity_penalty(prev, cur, cfg: PISConfig) -> float:
    """``lambda_psi`` when consecutive steps touch disjoint vertex sets."""
    if cfg.lambda_psi == 0:
        return 0.0
    return 0.0 if set(prev.vertices) & set(cur.vertices) else cfg.lambda_psi


def trace_inconsistency(trace, cfg: PISConfig) -> TraceSignal:
    steps = list(getattr(trace, "steps", trace))
    if not steps:
        raise EmptyTrace("cannot score an empty trace")
    per_step = tuple(s.signal for s in steps)
    psi = tuple(continuity_penalty(a, b, cfg) for a, b in zip(steps, steps[1:]))
    j = sum(cfg.gamma**k * sig.l_inc for k, sig in enumerate(per_step)) + sum(psi)
    return TraceSignal(j, per_step, psi)


def classify_cause(sig: StepSignal, cfg: PISConfig) -> str:
    if sig.l_inc <= cfg.tau:
        return NONE
    if cfg.beta * sig.epistemic_term >= (1.0 - cfg.beta) * sig.credal_term:
        return EPISTEMIC
    return CREDAL
