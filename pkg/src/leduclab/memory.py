"""Append-only game memory: full trajectories, digests, and reflections.

Records persist one JSON object per line. Every record is validated on
append by replaying its steps through the engine; the replay must be legal
and reproduce the stored outcome, so a corrupt record can never enter the
store. Digests are frequency tables over (rank, round, action) for both the
opponent's revealed play and the agent's own, the raw material for pattern
detection and rank weights.

Scripted reflection grades each own decision with hindsight: the opponent's
revealed card pins their rank, a uniform stand-in models their remaining
choices, and the decision is "wrong" exactly when some alternative action
had a strictly higher lookahead value. The gap is the counterfactual chip
delta of switching.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .engine import (
    ACTIONS,
    POSTREVEAL,
    PREREVEAL,
    RANK_NAMES,
    RANK_ORDER,
    RANKS,
    ROUNDS,
    EngineError,
    GameState,
    Outcome,
    RawObservation,
    apply_action,
    deal,
    new_game,
    observe,
    rank_of,
)

SCHEMA_VERSION = 1
EV_TOL = 1e-9


class CorruptRecordError(EngineError):
    """A record failed engine replay validation."""


@dataclass(frozen=True)
class GameStep:
    player: int
    observation: RawObservation
    action: str
    say: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "player": self.player,
            "observation": self.observation.to_json_dict(),
            "action": self.action,
            "say": self.say,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "GameStep":
        return cls(
            player=d["player"],
            observation=RawObservation.from_json_dict(d["observation"]),
            action=d["action"],
            say=d.get("say"),
        )


@dataclass(frozen=True)
class GameRecord:
    game_index: int
    seed: int | None
    small_blind: int
    steps: tuple[GameStep, ...]
    revealed_cards: tuple[str, str]
    public_card: str | None
    outcome: Outcome
    round2_first_actor: str = "small_blind"

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "game_index": self.game_index,
            "seed": self.seed,
            "small_blind": self.small_blind,
            "steps": [s.to_json_dict() for s in self.steps],
            "revealed_cards": list(self.revealed_cards),
            "public_card": self.public_card,
            "outcome": self.outcome.to_json_dict(),
            "round2_first_actor": self.round2_first_actor,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "GameRecord":
        return cls(
            game_index=d["game_index"],
            seed=d["seed"],
            small_blind=d["small_blind"],
            steps=tuple(GameStep.from_json_dict(s) for s in d["steps"]),
            revealed_cards=tuple(d["revealed_cards"]),
            public_card=d["public_card"],
            outcome=Outcome.from_json_dict(d["outcome"]),
            round2_first_actor=d.get("round2_first_actor", "small_blind"),
        )


@dataclass(frozen=True)
class Verdict:
    step_index: int
    action: str
    label: str  # "right" or "wrong"
    reason: str
    ev_taken: float
    ev_best: float
    counterfactual: float  # chips recoverable by switching; 0 when right


@dataclass(frozen=True)
class ReflectionNote:
    game_index: int
    verdicts: tuple[Verdict, ...]
    opponent_motivation: tuple[dict, ...]

    def to_json_dict(self) -> dict:
        return {
            "game_index": self.game_index,
            "verdicts": [
                {
                    "step_index": v.step_index,
                    "action": v.action,
                    "label": v.label,
                    "reason": v.reason,
                    "ev_taken": v.ev_taken,
                    "ev_best": v.ev_best,
                    "counterfactual": v.counterfactual,
                }
                for v in self.verdicts
            ],
            "opponent_motivation": list(self.opponent_motivation),
        }


@dataclass(frozen=True)
class HistoryDigest:
    window: tuple[int, int]  # half-open game-index range
    opponent_counts: dict  # (rank, round, action) -> int
    own_counts: dict
    chip_trajectory: tuple[int, ...]
    decision_steps: int
    empty: bool = False


def replay(record: GameRecord) -> GameState:
    """Re-run a record through the engine; raises CorruptRecordError on any
    illegal step, observation mismatch, or outcome mismatch."""
    if record.seed is not None:
        state = new_game(
            record.seed,
            small_blind_player=record.small_blind,
            round2_first_actor=record.round2_first_actor,
        )
        if state.private_cards != record.revealed_cards:
            raise CorruptRecordError(
                f"seed {record.seed} deals {state.private_cards}, "
                f"record says {record.revealed_cards}"
            )
    else:
        if record.public_card is None:
            raise CorruptRecordError("seedless record needs an explicit public card")
        state = deal(
            record.revealed_cards,
            record.public_card,
            small_blind_player=record.small_blind,
            round2_first_actor=record.round2_first_actor,
        )
    for i, step in enumerate(record.steps):
        if state.terminal:
            raise CorruptRecordError(f"step {i} after the game ended")
        if state.to_act != step.player:
            raise CorruptRecordError(f"step {i}: player {step.player} acted out of turn")
        expected = observe(state, step.player)
        if expected != step.observation:
            raise CorruptRecordError(f"step {i}: observation does not match replay")
        try:
            state = apply_action(state, step.action)
        except EngineError as exc:
            raise CorruptRecordError(f"step {i}: {exc}") from exc
    if state.outcome != record.outcome:
        raise CorruptRecordError(
            f"replay outcome {state.outcome} != recorded {record.outcome}"
        )
    if record.public_card != state.public_card:
        raise CorruptRecordError("recorded public card does not match replay")
    return state


class MemoryStore:
    """Append-only store of validated game records.

    ``path`` enables JSONL persistence; without it the store is in-memory.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self.records: list[GameRecord] = []
        self.reflections: dict[int, ReflectionNote] = {}
        if self.path and self.path.exists():
            self._load()

    def _load(self) -> None:
        with self.path.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                d = json.loads(line)
                if d.get("schema_version") != SCHEMA_VERSION:
                    raise CorruptRecordError(
                        f"unsupported memory schema {d.get('schema_version')!r}"
                    )
                record = GameRecord.from_json_dict(d)
                replay(record)
                self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: GameRecord) -> None:
        replay(record)  # corrupt records never enter the store
        self.records.append(record)
        if self.path:
            with self.path.open("a") as fh:
                fh.write(json.dumps(record.to_json_dict(), sort_keys=True) + "\n")

    def add_reflection(self, note: ReflectionNote) -> None:
        self.reflections[note.game_index] = note

    def digest(
        self, window: tuple[int, int] | None = None, perspective: int = 0
    ) -> HistoryDigest:
        """Frequency tables over a half-open window of stored records."""
        return digest(self, window, perspective=perspective)

    def slice(self, window: tuple[int, int] | None):
        if window is None:
            return self.records
        lo, hi = window
        if lo < 0 or hi > len(self.records) or lo > hi:
            raise IndexError(f"window {window} outside store of {len(self.records)}")
        return self.records[lo:hi]


def digest(
    store: MemoryStore,
    window: tuple[int, int] | None = None,
    perspective: int = 0,
) -> HistoryDigest:
    """Count (rank, round, action) frequencies over a window of records.

    ``perspective`` is the seat whose view is "own"; the other seat's steps
    are counted against their revealed card as the opponent's behaviour.
    """
    records = store.slice(window)
    opponent_counts: dict = {}
    own_counts: dict = {}
    trajectory: list[int] = []
    steps = 0
    running = 0
    for record in records:
        for step in record.steps:
            ctx = step.observation.round_name
            rank = rank_of(record.revealed_cards[step.player])
            key = (rank, ctx, step.action)
            target = own_counts if step.player == perspective else opponent_counts
            target[key] = target.get(key, 0) + 1
            steps += 1
        running += record.outcome.net_chips[perspective]
        trajectory.append(running)
    lo = window[0] if window else 0
    hi = window[1] if window else len(store.records)
    return HistoryDigest(
        window=(lo, hi),
        opponent_counts=opponent_counts,
        own_counts=own_counts,
        chip_trajectory=tuple(trajectory),
        decision_steps=steps,
        empty=(steps == 0),
    )


def merge_digests(a: HistoryDigest, b: HistoryDigest) -> HistoryDigest:
    """Union of two digests over disjoint adjacent windows."""
    opponent = dict(a.opponent_counts)
    for k, v in b.opponent_counts.items():
        opponent[k] = opponent.get(k, 0) + v
    own = dict(a.own_counts)
    for k, v in b.own_counts.items():
        own[k] = own.get(k, 0) + v
    base = a.chip_trajectory[-1] if a.chip_trajectory else 0
    return HistoryDigest(
        window=(a.window[0], b.window[1]),
        opponent_counts=opponent,
        own_counts=own,
        chip_trajectory=a.chip_trajectory + tuple(base + x for x in b.chip_trajectory),
        decision_steps=a.decision_steps + b.decision_steps,
        empty=a.empty and b.empty,
    )


def _hindsight_gains(record: GameRecord, step_index: int) -> dict[str, float]:
    """Lookahead value of each legal action at a recorded own decision,
    with the opponent's revealed card known and their remaining behaviour
    modelled as uniform over legal actions."""
    from .plans import enumerate_plans
    from .policy import PolicyTable

    step = record.steps[step_index]
    opp_rank = rank_of(record.revealed_cards[1 - step.player])
    point = _point_for_step(record, step_index)
    plans = enumerate_plans(
        point,
        {rank: (1.0 if rank == opp_rank else 0.0) for rank in RANKS},
        PolicyTable.uniform(),
    )
    return {p.action: p.expected_gain for p in plans}


def _point_for_step(record: GameRecord, step_index: int):
    from .plans import DecisionPoint

    if record.round2_first_actor == "small_blind":
        opener = record.small_blind
    elif record.round2_first_actor == "big_blind":
        opener = 1 - record.small_blind
    else:
        opener = 0
    step = record.steps[step_index]
    ctx = step.observation.round_name
    opp_acted = any(
        s.player != step.player and s.observation.round_name == ctx
        for s in record.steps[:step_index]
    )
    return DecisionPoint(
        obs=step.observation,
        acts_first_postreveal=(opener == step.player),
        opponent_acted_this_round=opp_acted,
    )


def _motivation(record: GameRecord, step: GameStep) -> str:
    rank = rank_of(record.revealed_cards[step.player])
    public = record.public_card
    paired = public is not None and rank_of(public) == rank
    strong = paired or rank == "K"
    name = RANK_NAMES[rank]
    if step.action == "raise":
        return f"raised holding {name}: {'value bet' if strong else 'a bluff or probe'}"
    if step.action == "call":
        return f"called holding {name}: {'extracting value' if strong else 'keeping the pot controlled'}"
    if step.action == "check":
        return f"checked holding {name}: {'trapping' if strong else 'pot control'}"
    return f"folded holding {name}: cutting losses"


def reflect(record: GameRecord, backend=None, perspective: int = 0) -> ReflectionNote:
    """Grade the perspective player's decisions in a finished game.

    With a backend the grading comes from its reflect answer; the scripted
    path compares each taken action's hindsight value (opponent card
    revealed) against the best alternative and flags strictly dominated
    choices as wrong.
    """
    if backend is not None:
        from .reasoners.base import ReasonerRequest

        response = backend.complete(
            ReasonerRequest.for_reflection(record=record, perspective=perspective)
        )
        if isinstance(response.structured, ReflectionNote):
            return response.structured
    verdicts = []
    motivations = []
    for i, step in enumerate(record.steps):
        if step.player != perspective:
            motivations.append({"step_index": i, "action": step.action, "note": _motivation(record, step)})
            continue
        gains = _hindsight_gains(record, i)
        taken = gains[step.action]
        best_action = max(gains, key=lambda a: (gains[a], -ACTIONS.index(a)))
        best = gains[best_action]
        gap = best - taken
        if gap > EV_TOL:
            verdicts.append(
                Verdict(
                    step_index=i,
                    action=step.action,
                    label="wrong",
                    reason=f"{best_action} was worth {gap:.3f} more chips with the opponent's card known",
                    ev_taken=taken,
                    ev_best=best,
                    counterfactual=gap,
                )
            )
        else:
            verdicts.append(
                Verdict(
                    step_index=i,
                    action=step.action,
                    label="right",
                    reason="no alternative scored higher in hindsight",
                    ev_taken=taken,
                    ev_best=best,
                    counterfactual=0.0,
                )
            )
    return ReflectionNote(
        game_index=record.game_index,
        verdicts=tuple(verdicts),
        opponent_motivation=tuple(motivations),
    )
