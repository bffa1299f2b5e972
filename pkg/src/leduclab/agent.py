"""The evolving agent: per-decision cognition chain plus per-game evolution.

Each decision runs interpret -> environmental belief -> self belief -> plan
enumeration -> selection -> action, with every stage routed through the
configured reasoner backend and its provenance recorded in a trace. After
each game the finished record is stored, reflected on, and (on the evolution
cadence) both pattern tables are recalibrated: the opponent's environmental
pattern first, then the self pattern as a response to it. Stage ablations
switch individual links of the chain to their documented substitutes.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from .beliefs import BeliefReport, prior
from .engine import RawObservation, rank_of
from .memory import GameRecord, MemoryStore, ReflectionNote
from .plans import DecisionPoint, act as plan_act
from .policy import (
    PatternReport,
    PolicyTable,
    detect,
    diverge,
    evaluate_joint,
    evolve_self,
    revise,
)
from .reasoners.base import Reasoner, ReasonerRequest
from .reasoners.scripted import ScriptedReasoner

logger = logging.getLogger(__name__)

ABLATABLE_STAGES = ("policy", "belief", "plan", "reflection")


@dataclass(frozen=True)
class AgentConfig:
    ablations: frozenset = frozenset()
    evolve_every: int = 1
    style: str = "auto"  # tie-break style; "auto" derives it from the self pattern
    act_mode: str = "greedy"
    temperature: float = 0.7
    blend: float = 0.5
    # Evolution uses a tighter trigger and lighter smoothing than the
    # documented module defaults (0.2 / 1.0): with those, the update deadband
    # freezes the table 0.1-0.3 TV away from the opponent's measured play.
    divergence_threshold: float = 0.1
    smoothing: float = 0.25
    history_window: int | None = None  # games fed to evolution; None = all
    lookahead: str = "max"

    def __post_init__(self):
        unknown = set(self.ablations) - set(ABLATABLE_STAGES)
        if unknown:
            raise ValueError(f"unknown ablations: {sorted(unknown)}")
        if self.evolve_every < 1:
            raise ValueError("evolve_every must be >= 1")


@dataclass(frozen=True)
class DecisionTrace:
    observation_text: str
    env_belief: BeliefReport | None
    self_belief: object | None
    choice: object | None
    action: str
    provenance: dict
    ablated: tuple[str, ...]
    llm_plan: dict | None = None  # model-parsed numbers kept beside exact ones

    def to_json_dict(self) -> dict:
        return {
            "observation_text": self.observation_text,
            "env_belief": self.env_belief.to_json_dict() if self.env_belief else None,
            "self_belief": self.self_belief.to_json_dict() if self.self_belief else None,
            "plans": self.choice.to_json_dict() if self.choice else None,
            "llm_plan": self.llm_plan,
            "action": self.action,
            "provenance": self.provenance,
            "ablated": list(self.ablated),
        }


def interpret(raw: RawObservation, backend: Reasoner) -> str:
    """Readable text for an observation; scripted template on any failure."""
    from .reasoners.prompts import interpret_text

    try:
        response = backend.complete(ReasonerRequest.for_interpret(raw))
        return response.text
    except Exception as exc:
        logger.warning("interpret backend failed (%s); using template", exc)
        return interpret_text(raw)


class EvolvingAgent:
    """Stateful player that calibrates opponent and self patterns over games."""

    def __init__(
        self,
        backend: Reasoner | None = None,
        memory: MemoryStore | None = None,
        config: AgentConfig | None = None,
        rng: random.Random | None = None,
        env_pattern: PatternReport | None = None,
        self_pattern: PatternReport | None = None,
    ):
        self.backend = backend or ScriptedReasoner()
        self.memory = memory if memory is not None else MemoryStore()
        self.config = config or AgentConfig()
        self.rng = rng or random.Random(0)
        uniform = PolicyTable.uniform()
        self.env_pattern = env_pattern or PatternReport.from_table(
            uniform, rationale="cold start: uniform over legal actions"
        )
        self.self_pattern = self_pattern or PatternReport.from_table(
            uniform, rationale="cold start: uniform over legal actions"
        )
        self.reflections: list[ReflectionNote] = []
        self.games_seen = 0
        self.seat = 0
        self._game_actions: list[tuple[int, str, str]] = []  # (player, action, round)
        self._small_blind = 0
        self._round2_first_actor = "small_blind"
        self.last_trace: DecisionTrace | None = None

    # -- harness protocol ----------------------------------------------------

    def begin_game(self, game_index: int, seat: int, small_blind: int,
                   round2_first_actor: str = "small_blind") -> None:
        self.seat = seat
        self._small_blind = small_blind
        self._round2_first_actor = round2_first_actor
        self._game_actions = []

    def observe_step(self, player: int, action: str, round_name: str) -> None:
        self._game_actions.append((player, action, round_name))

    def act(self, obs: RawObservation) -> str:
        action, trace = self.decide(obs)
        self.last_trace = trace
        return action

    def end_game(self, record: GameRecord) -> None:
        self.end_of_game(record)

    # -- cognition chain -----------------------------------------------------

    def _ablated(self, stage: str) -> bool:
        return stage in self.config.ablations

    def _effective_patterns(self) -> tuple[PatternReport, PatternReport]:
        if self._ablated("policy"):
            uniform = PatternReport.from_table(PolicyTable.uniform(), rationale="policy ablated")
            return uniform, uniform
        return self.env_pattern, self.self_pattern

    def _opponent_actions(self):
        return tuple((a, r) for p, a, r in self._game_actions if p != self.seat)

    def _own_actions(self):
        return tuple((a, r) for p, a, r in self._game_actions if p == self.seat)

    def decide(self, obs: RawObservation) -> tuple[str, DecisionTrace]:
        env_pattern, self_pattern = self._effective_patterns()
        provenance: dict[str, str] = {}

        observation_text = interpret(obs, self.backend)
        provenance["interpret"] = "scripted" if isinstance(self.backend, ScriptedReasoner) else "llm"

        if self._ablated("belief"):
            env_belief = BeliefReport(
                posterior=prior(obs.hand, obs.public_card).distribution,
                best_combination="deck-counting prior (belief stage ablated)",
                evidence=(),
            )
            self_belief_report = None
            provenance["belief_env"] = "ablated"
            provenance["belief_self"] = "ablated"
        else:
            response = self._complete_safe(
                ReasonerRequest.for_belief_env(
                    obs,
                    self._opponent_actions(),
                    env_pattern,
                    my_actions=self._own_actions(),
                    pattern_self=self_pattern,
                ),
                fallback=lambda: self._scripted_belief_env(obs, env_pattern),
            )
            env_belief = response.structured
            provenance["belief_env"] = response.provenance
            response = self._complete_safe(
                ReasonerRequest.for_belief_self(obs, self_pattern, env_belief),
                fallback=lambda: self._scripted_belief_self(obs, self_pattern, env_belief),
            )
            self_belief_report = response.structured
            provenance["belief_self"] = response.provenance

        llm_plan = None
        if self._ablated("plan"):
            action = self._sample_from_pattern(obs, self_pattern)
            choice = None
            provenance["plan"] = "ablated"
        else:
            action, choice, llm_plan, plan_prov = self._plan_action(
                obs, env_belief, env_pattern, self_pattern
            )
            provenance["plan"] = plan_prov

        if action not in obs.legal_actions:  # decide never fails on a legal input
            logger.error("stage produced illegal action %r; taking first legal", action)
            action = obs.legal_actions[0]

        trace = DecisionTrace(
            observation_text=observation_text,
            env_belief=env_belief,
            self_belief=self_belief_report,
            choice=choice,
            action=action,
            provenance=provenance,
            ablated=tuple(sorted(self.config.ablations)),
            llm_plan=llm_plan,
        )
        return action, trace

    def _complete_safe(self, request, fallback):
        try:
            return self.backend.complete(request)
        except Exception as exc:
            logger.warning("%s stage failed (%s); using scripted fallback", request.kind, exc)
            return fallback()

    def _scripted_belief_env(self, obs, env_pattern):
        return ScriptedReasoner().complete(
            ReasonerRequest.for_belief_env(obs, self._opponent_actions(), env_pattern)
        )

    def _scripted_belief_self(self, obs, self_pattern, env_belief):
        return ScriptedReasoner().complete(
            ReasonerRequest.for_belief_self(obs, self_pattern, env_belief)
        )

    def _style(self, self_pattern: PatternReport) -> str:
        if self.config.style == "auto":
            return self_pattern.character
        return self.config.style

    def _decision_point(self, obs: RawObservation) -> DecisionPoint:
        if self._round2_first_actor == "small_blind":
            opener = self._small_blind
        elif self._round2_first_actor == "big_blind":
            opener = 1 - self._small_blind
        else:
            opener = 0
        current_round = obs.round_name
        opp_acted = any(
            p != self.seat and r == current_round for p, _, r in self._game_actions
        )
        return DecisionPoint(
            obs=obs,
            acts_first_postreveal=(opener == self.seat),
            opponent_acted_this_round=opp_acted,
        )

    def _plan_action(self, obs, env_belief, env_pattern, self_pattern):
        point = self._decision_point(obs)
        style = self._style(self_pattern)
        request = ReasonerRequest.for_plan(
            point,
            env_belief,
            env_pattern,
            self_policy=self_pattern.table,
            style=style,
            lookahead=self.config.lookahead,
        )
        response = self._complete_safe(
            request, fallback=lambda: ScriptedReasoner().complete(request)
        )
        llm_plan = None
        if isinstance(response.structured, dict):
            # Model path: keep its parsed numbers beside the exact ones, and
            # honour its pick when legal; otherwise fall back to the exact plan.
            llm_plan = response.structured
            choice = ScriptedReasoner().complete(request).structured
            best = llm_plan.get("best")
            if best in obs.legal_actions:
                return best, choice, llm_plan, response.provenance
            provenance = "fallback"
        else:
            choice = response.structured
            provenance = response.provenance
        action = plan_act(
            choice,
            mode=self.config.act_mode,
            temperature=self.config.temperature,
            rng=self.rng,
        )
        return action, choice, llm_plan, provenance

    def _sample_from_pattern(self, obs: RawObservation, self_pattern: PatternReport) -> str:
        dist = self_pattern.table.response_distribution(
            rank_of(obs.hand), obs.round_name, obs.legal_actions
        )
        actions = list(dist)
        weights = [dist[a] for a in actions]
        draw = self.rng.random() * sum(weights)
        acc = 0.0
        for a, w in zip(actions, weights):
            acc += w
            if draw <= acc:
                return a
        return actions[-1]

    # -- evolution loop --------------------------------------------------------

    def end_of_game(self, record: GameRecord) -> None:
        """Store the record, reflect, and on cadence recalibrate patterns."""
        self.memory.append(record)
        self.games_seen += 1
        if not self._ablated("reflection"):
            note = self._reflect(record)
            if note is not None:
                self.reflections.append(note)
                self.memory.add_reflection(note)
        if self._ablated("policy"):
            return
        if self.games_seen % self.config.evolve_every != 0:
            return
        try:
            env_pattern, self_pattern = self._evolved_patterns()
        except Exception as exc:
            logger.warning("evolution failed (%s); keeping previous patterns", exc)
            return
        # Commit both tables together so readers never see a half update.
        self.env_pattern, self.self_pattern = env_pattern, self_pattern

    def _reflect(self, record: GameRecord) -> ReflectionNote | None:
        try:
            response = self.backend.complete(
                ReasonerRequest.for_reflection(record, perspective=self.seat)
            )
            if isinstance(response.structured, ReflectionNote):
                return response.structured
            from .memory import reflect as scripted_reflect

            return scripted_reflect(record, perspective=self.seat)
        except Exception as exc:
            logger.warning("reflection failed (%s); skipping note", exc)
            return None

    def _window(self) -> tuple[int, int] | None:
        if self.config.history_window is None:
            return None
        hi = len(self.memory)
        return (max(0, hi - self.config.history_window), hi)

    def _evolved_patterns(self) -> tuple[PatternReport, PatternReport]:
        digest = self.memory.digest(self._window(), perspective=self.seat)
        if digest.empty:
            return self.env_pattern, self.self_pattern
        detected = detect(digest, smoothing=self.config.smoothing, side="opponent")
        finding = diverge(
            self.env_pattern.table, detected, threshold=self.config.divergence_threshold
        )
        if not finding.triggered:
            return self.env_pattern, self.self_pattern
        backend = None if isinstance(self.backend, ScriptedReasoner) else self.backend
        joint = evaluate_joint(
            self.env_pattern.table,
            digest,
            reflections=tuple(self.reflections),
            backend=backend,
            blend=self.config.blend,
            side="opponent",
            smoothing=self.config.smoothing,
        )
        env_table = revise(joint, digest)
        env_pattern = PatternReport.from_table(
            env_table,
            rationale=f"revised after game {self.games_seen}: max row TV "
            f"{max(finding.row_tv.values()):.3f} > {finding.threshold}",
        )
        self_pattern = evolve_self(
            env_pattern,
            self.self_pattern,
            digest,
            reflections=tuple(self.reflections),
            backend=backend,
            blend=self.config.blend,
            smoothing=self.config.smoothing,
            best_response_shift=not self._ablated("reflection"),
        )
        return env_pattern, self_pattern
