"""Leduc Hold'em laboratory.

An exact two-player engine, an agent that evolves its opponent and self
policy tables from revealed game history, Bayesian card beliefs, exact
expectimax plan scoring, CFR/rule/random baselines, and a seeded match
harness with JSONL logging.
"""

from .agent import AgentConfig, DecisionTrace, EvolvingAgent, interpret
from .beliefs import BeliefReport, SelfBelief, environmental_belief, prior, self_belief
from .engine import (
    ACTIONS,
    DECK,
    RANKS,
    GameState,
    Outcome,
    RawObservation,
    apply_action,
    deal,
    legal_actions,
    new_game,
    observe,
    settle,
)
from .harness import AgentSpec, MatchConfig, MatchResult, run_match
from .memory import GameRecord, HistoryDigest, MemoryStore, ReflectionNote, reflect
from .plans import DecisionPoint, PlanChoice, PlanEvaluation, act, enumerate_plans, select_best
from .policy import PatternReport, PolicyTable, classify_character, detect, diverge, evaluate_joint, evolve_self, revise

__all__ = [
    "AgentConfig",
    "DecisionTrace",
    "EvolvingAgent",
    "interpret",
    "BeliefReport",
    "SelfBelief",
    "environmental_belief",
    "prior",
    "self_belief",
    "ACTIONS",
    "DECK",
    "RANKS",
    "GameState",
    "Outcome",
    "RawObservation",
    "apply_action",
    "deal",
    "legal_actions",
    "new_game",
    "observe",
    "settle",
    "AgentSpec",
    "MatchConfig",
    "MatchResult",
    "run_match",
    "GameRecord",
    "HistoryDigest",
    "MemoryStore",
    "ReflectionNote",
    "reflect",
    "DecisionPoint",
    "PlanChoice",
    "PlanEvaluation",
    "act",
    "enumerate_plans",
    "select_best",
    "PatternReport",
    "PolicyTable",
    "classify_character",
    "detect",
    "diverge",
    "evaluate_joint",
    "evolve_self",
    "revise",
]

__version__ = "0.1.0"
