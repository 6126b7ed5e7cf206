import itertools
from dataclasses import dataclass

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tempora import allen
from tempora.credal import CredalInterval
from tempora.errors import EmptyTrace
from tempora.evidential import DirichletEvidence
from tempora.pis import (
    CREDAL,
    EPISTEMIC,
    NONE,
    PISConfig,
    StepSignal,
    classify_cause,
    continuity_penalty,
    step_inconsistency,
    trace_inconsistency,
)

VACUOUS = DirichletEvidence.vacuous()
SHARP = DirichletEvidence.concentrated(allen.mask("before"), 50)


@dataclass
class Step:
    signal: StepSignal
    vertices: tuple


def sig(l_inc, e=0.0, c=0.0):
    return StepSignal(l_inc, e, c, CredalInterval(0.0, 1.0))


def test_beta_one_ignores_credal():
    cfg = PISConfig(beta=1.0)
    for ci in (CredalInterval(0, 0), CredalInterval(0, 1), CredalInterval(1, 1)):
        s = step_inconsistency(ci, SHARP, cfg)
        assert s.l_inc == s.epistemic_term == 13 / 62


def test_beta_zero_full_width_is_zero():
    s = step_inconsistency(CredalInterval(0, 1), VACUOUS, PISConfig(beta=0.0, epsilon=0.1))
    assert s.l_inc == 0.0


def test_half_beta_vacuous_contradiction():
    s = step_inconsistency(CredalInterval(0, 0), VACUOUS, PISConfig(beta=0.5, epsilon=0.1))
    assert s.l_inc == pytest.approx(0.55, abs=1e-15)


@given(
    st.floats(0, 1), st.floats(0.01, 1), st.floats(0, 1), st.floats(0, 1),
    st.lists(st.floats(0.05, 60), min_size=13, max_size=13),
)
def test_l_inc_is_convex_combination_in_unit_interval(beta, eps, lo, width, alpha):
    hi = min(1.0, lo + width)
    cfg = PISConfig(beta=beta, epsilon=eps)
    s = step_inconsistency(CredalInterval(lo, hi), DirichletEvidence(alpha), cfg)
    assert 0.0 <= s.l_inc <= 1.0
    assert s.l_inc == beta * s.epistemic_term + (1 - beta) * s.credal_term
    assert 0.0 <= s.credal_term <= eps


def test_continuity_penalty():
    cfg = PISConfig(lambda_psi=0.05)
    assert continuity_penalty(Step(sig(0), ("A", "B")), Step(sig(0), ("B", "C")), cfg) == 0.0
    assert continuity_penalty(Step(sig(0), ("A", "B")), Step(sig(0), ("C", "D")), cfg) == 0.05
    assert continuity_penalty(Step(sig(0), ("A", "B")), Step(sig(0), ("C", "D")), PISConfig(lambda_psi=0)) == 0.0


def test_single_step_trace():
    assert trace_inconsistency([Step(sig(0.3), ("A", "B"))], PISConfig()).j_pis == 0.3


def test_two_connected_steps_no_discount():
    steps = [Step(sig(0.2), ("A", "B")), Step(sig(0.4), ("B", "C"))]
    assert trace_inconsistency(steps, PISConfig(gamma=1.0)).j_pis == pytest.approx(0.6, abs=1e-15)


def test_two_disjoint_steps_discounted():
    steps = [Step(sig(0.2), ("A", "B")), Step(sig(0.4), ("C", "D"))]
    out = trace_inconsistency(steps, PISConfig(gamma=0.5, lambda_psi=0.05))
    assert out.j_pis == pytest.approx(0.2 + 0.5 * 0.4 + 0.05, abs=1e-15)
    assert out.psi_terms == (0.05,)


# Hand-computed fixtures: (l_inc, vertices) per step, config, expected J.
FIXTURES = [
    (
        [(0.1, ("A", "B", "C")), (0.25, ("A", "C", "D")), (0.6, ("E", "F")), (0.05, ("F", "A"))],
        PISConfig(gamma=0.9, lambda_psi=0.05),
        # 0.1 + 0.9*0.25 + 0.81*0.6 + 0.729*0.05 + one disjoint transition (0.05)
        0.1 + 0.225 + 0.486 + 0.03645 + 0.05,
    ),
    (
        [(0.5, ("A", "B")), (0.5, ("C", "D")), (0.5, ("E", "F"))],
        PISConfig(gamma=0.5, lambda_psi=0.1),
        # 0.5 + 0.25 + 0.125 + 2 * 0.1
        1.075,
    ),
    (
        [(0.2, ("X", "Y", "Z")), (0.0, ("Z",)), (0.9, ("Q",)), (0.3, ("Q", "X")), (0.1, ("Y",))],
        PISConfig(gamma=0.8, lambda_psi=0.02),
        # 0.2 + 0 + 0.64*0.9 + 0.512*0.3 + 0.4096*0.1 ; disjoint: Z->Q, QX->Y
        0.2 + 0.576 + 0.1536 + 0.04096 + 0.04,
    ),
]


@pytest.mark.parametrize("steps, cfg, expected", FIXTURES)
def test_hand_computed_traces(steps, cfg, expected):
    trace = [Step(sig(l), v) for l, v in steps]
    assert abs(trace_inconsistency(trace, cfg).j_pis - expected) <= 1e-12


def test_plain_sum_when_undiscounted():
    trace = [Step(sig(l), ("A",) if i % 2 else ("B",)) for i, l in enumerate((0.1, 0.2, 0.3))]
    assert trace_inconsistency(trace, PISConfig(gamma=1.0, lambda_psi=0.0)).j_pis == pytest.approx(0.6, abs=1e-15)


@given(st.lists(st.floats(0, 1), min_size=2, max_size=6), st.floats(0.1, 0.99))
def test_moving_worst_step_earlier_never_lowers_j(ls, gamma):
    cfg = PISConfig(gamma=gamma, lambda_psi=0.0)
    worst = max(range(len(ls)), key=ls.__getitem__)
    moved = [ls[worst]] + ls[:worst] + ls[worst + 1 :]
    j = lambda xs: trace_inconsistency([Step(sig(x), ("A",)) for x in xs], cfg).j_pis
    assert j(moved) >= j(ls) - 1e-12


def test_empty_trace():
    with pytest.raises(EmptyTrace):
        trace_inconsistency([], PISConfig())


def test_classify_cause():
    assert classify_cause(sig(0.3, 0.6, 0.0), PISConfig(tau=0.35)) == NONE
    cfg = PISConfig(beta=0.5, tau=0.4)
    assert classify_cause(sig(0.46, 0.9, 0.02), cfg) == EPISTEMIC
    s = step_inconsistency(CredalInterval(0, 0), VACUOUS, PISConfig(beta=0.0, epsilon=1.0, tau=0.5))
    assert classify_cause(s, PISConfig(beta=0.0, epsilon=1.0, tau=0.5)) == CREDAL


@pytest.mark.parametrize(
    "kwargs",
    [{"beta": 1.5}, {"gamma": 0.0}, {"epsilon": 0.0}, {"tau": 1.2}, {"lambda_psi": -1}, {"phi_mode": "soft"}],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PISConfig(**kwargs)


def test_deterministic():
    trace = [Step(sig(0.1 * i), (str(i),)) for i in range(5)]
    assert trace_inconsistency(trace, PISConfig()) == trace_inconsistency(trace, PISConfig())
