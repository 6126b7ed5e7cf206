"""Temporal reasoning over Allen interval networks with step-level inconsistency signals."""

from .allen import RELATIONS, compose, converse
from .compiler import Document, Question, parse_statement
from .credal import Assertion, CredalInterval, credal_support
from .evidential import DirichletEvidence, NoisyProvider, RemoteProvider, RuleBasedProvider
from .network import EventGraph, enumerate_scenarios, path_consistency
from .orchestrator import MCTSConfig, answer_question, mcts_search, solve
from .pis import PISConfig, classify_cause, step_inconsistency, trace_inconsistency

__version__ = "0.1.0"

__all__ = [
    "RELATIONS", "compose", "converse", "Document", "Question", "parse_statement", "Assertion",
    "CredalInterval", "credal_support", "DirichletEvidence", "NoisyProvider", "RemoteProvider",
    "RuleBasedProvider", "EventGraph", "enumerate_scenarios", "path_consistency", "MCTSConfig",
    "answer_question", "mcts_search", "solve", "PISConfig", "classify_cause", "step_inconsistency",
    "trace_inconsistency",
]
