"""Exact two-player Leduc Hold'em engine.

Rules implemented here:
- Deck of 6 cards: {J, Q, K} x {Spades, Hearts}. Card text is suit letter
  followed by rank letter ("SJ" = Jack of Spades, "HK" = King of Hearts).
- Two players. One posts a small blind of 1 chip, the other a big blind
  of 2 chips; the small blind acts first in the opening round.
- Two betting rounds with a two-bet cap per round. A raise puts the raiser's
  total contribution 2 chips above the opponent's before the public card is
  revealed and 4 chips above afterwards.
- After the first round closes, one public card is revealed from the four
  undealt cards. After the second round closes the hands go to showdown:
  a private card pairing the public card wins; otherwise the higher rank
  wins; equal ranks draw.
- The winner collects the loser's contribution (raw net, an integer between
  1 and 14). Match logs additionally carry ``net / 2`` as ``logged_payoff``
  because that is the unit historical transcripts were written in.

States are immutable; every transition returns a new ``GameState``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

RANKS = ("J", "Q", "K")
SUITS = ("S", "H")
DECK = tuple(s + r for s in SUITS for r in RANKS)

RAISE = "raise"
CALL = "call"
CHECK = "check"
FOLD = "fold"
ACTIONS = (RAISE, CALL, CHECK, FOLD)

PREREVEAL = "prereveal"
POSTREVEAL = "postreveal"
ROUNDS = (PREREVEAL, POSTREVEAL)

RAISE_SIZE = {PREREVEAL: 2, POSTREVEAL: 4}
MAX_RAISES_PER_ROUND = 2
SMALL_BLIND = 1
BIG_BLIND = 2

RANK_ORDER = {"J": 0, "Q": 1, "K": 2}
RANK_NAMES = {"J": "Jack", "Q": "Queen", "K": "King"}
SUIT_NAMES = {"S": "Spades", "H": "Hearts"}

# Who opens the second betting round. "small_blind" is the default; "seat0"
# reproduces archived transcripts where round two always opens at seat 0.
ROUND2_FIRST_ACTOR_CHOICES = ("small_blind", "big_blind", "seat0")


class EngineError(Exception):
    """Base class for engine rule violations."""


class GameOverError(EngineError):
    """Raised when acting on or querying a finished game."""


class IllegalActionError(EngineError):
    """Raised when an action violates a betting rule; names the rule."""


def rank_of(card: str) -> str:
    return card[1]


def card_name(card: str) -> str:
    """Readable card name, e.g. "HK" -> "King of Hearts"."""
    return f"{RANK_NAMES[card[1]]} of {SUIT_NAMES[card[0]]}"


@dataclass(frozen=True)
class Outcome:
    kind: str  # "showdown" or "fold"
    winner: int | None  # None on draw
    net_chips: tuple[int, int]

    def __post_init__(self):
        if sum(self.net_chips) != 0:
            raise EngineError("outcome must be zero-sum")

    @property
    def logged_payoff(self) -> float:
        """Winner's net on the halved scale used by match transcripts."""
        return max(self.net_chips) / 2

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "winner": self.winner,
            "net_chips": list(self.net_chips),
            "logged_payoff": self.logged_payoff,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Outcome":
        return cls(kind=d["kind"], winner=d["winner"], net_chips=tuple(d["net_chips"]))


@dataclass(frozen=True)
class RawObservation:
    """One player's view of the game, mirroring the historical dict keys."""

    hand: str
    public_card: str | None
    all_chips: tuple[int, int]  # (opponent contribution, own contribution)
    my_chips: int
    legal_actions: tuple[str, ...]

    def __post_init__(self):
        if self.my_chips != self.all_chips[1]:
            raise EngineError("my_chips must equal the self entry of all_chips")

    @property
    def round_name(self) -> str:
        return POSTREVEAL if self.public_card is not None else PREREVEAL

    def to_json_dict(self) -> dict:
        return {
            "hand": self.hand,
            "public_card": self.public_card,
            "all_chips": list(self.all_chips),
            "my_chips": self.my_chips,
            "legal_actions": list(self.legal_actions),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RawObservation":
        return cls(
            hand=d["hand"],
            public_card=d["public_card"],
            all_chips=tuple(d["all_chips"]),
            my_chips=d["my_chips"],
            legal_actions=tuple(d["legal_actions"]),
        )

    def prompt_repr(self) -> str:
        """Python-dict style text used inside prompts, matching old logs."""
        return repr(
            {
                "hand": self.hand,
                "public_card": self.public_card,
                "all_chips": list(self.all_chips),
                "my_chips": self.my_chips,
                "legal_actions": list(self.legal_actions),
            }
        )


@dataclass(frozen=True)
class GameState:
    seed: int | None
    small_blind: int
    private_cards: tuple[str, str]
    pending_public: str  # fixed at deal time, revealed when round one closes
    public_card: str | None
    contributions: tuple[int, int]
    round_name: str
    raises_this_round: int
    to_act: int
    actions_this_round: int
    history: tuple[tuple[int, str], ...]
    outcome: Outcome | None
    round2_first_actor: str = "small_blind"

    @property
    def terminal(self) -> bool:
        return self.outcome is not None

    @property
    def pot(self) -> int:
        return sum(self.contributions)


def new_game(
    seed: int,
    small_blind_player: int = 0,
    round2_first_actor: str = "small_blind",
) -> GameState:
    """Deal a fresh game from a seeded shuffle of the 6-card deck."""
    rng = random.Random(seed)
    deck = list(DECK)
    rng.shuffle(deck)
    return deal(
        (deck[0], deck[1]),
        deck[2],
        small_blind_player=small_blind_player,
        round2_first_actor=round2_first_actor,
        seed=seed,
    )


def deal(
    private_cards: tuple[str, str],
    pending_public: str,
    small_blind_player: int = 0,
    round2_first_actor: str = "small_blind",
    seed: int | None = None,
) -> GameState:
    """Start a game from explicit cards (for enumeration and replays)."""
    cards = set(private_cards) | {pending_public}
    if len(cards) != 3 or not cards.issubset(DECK):
        raise EngineError(f"invalid deal: {private_cards} + {pending_public}")
    if small_blind_player not in (0, 1):
        raise EngineError("small_blind_player must be 0 or 1")
    if round2_first_actor not in ROUND2_FIRST_ACTOR_CHOICES:
        raise EngineError(f"unknown round2_first_actor {round2_first_actor!r}")
    contributions = [0, 0]
    contributions[small_blind_player] = SMALL_BLIND
    contributions[1 - small_blind_player] = BIG_BLIND
    return GameState(
        seed=seed,
        small_blind=small_blind_player,
        private_cards=tuple(private_cards),
        pending_public=pending_public,
        public_card=None,
        contributions=tuple(contributions),
        round_name=PREREVEAL,
        raises_this_round=0,
        to_act=small_blind_player,
        actions_this_round=0,
        history=(),
        outcome=None,
        round2_first_actor=round2_first_actor,
    )


def legal_actions(state: GameState) -> list[str]:
    """Actions available to the player to act.

    Fold is always offered, even when checking is free, because that is how
    the action lists appear in the transcripts this engine replays.
    """
    if state.terminal:
        raise GameOverError("game over")
    return _legal_for(state, state.to_act)


def _legal_for(state: GameState, player: int) -> list[str]:
    mine = state.contributions[player]
    theirs = state.contributions[1 - player]
    can_raise = state.raises_this_round < MAX_RAISES_PER_ROUND
    if theirs > mine:
        acts = [CALL]
        if can_raise:
            acts.append(RAISE)
        acts.append(FOLD)
        return acts
    acts = []
    if can_raise:
        acts.append(RAISE)
    acts.extend([FOLD, CHECK])
    return acts


def _round2_opener(state: GameState) -> int:
    rule = state.round2_first_actor
    if rule == "small_blind":
        return state.small_blind
    if rule == "big_blind":
        return 1 - state.small_blind
    return 0  # "seat0"


def _showdown(state: GameState, contributions: tuple[int, int]) -> Outcome:
    public_rank = rank_of(state.public_card) if state.public_card else None
    r0, r1 = (rank_of(c) for c in state.private_cards)
    if public_rank is not None and r0 == public_rank:
        winner = 0
    elif public_rank is not None and r1 == public_rank:
        winner = 1
    elif RANK_ORDER[r0] > RANK_ORDER[r1]:
        winner = 0
    elif RANK_ORDER[r1] > RANK_ORDER[r0]:
        winner = 1
    else:
        return Outcome(kind="showdown", winner=None, net_chips=(0, 0))
    loser = 1 - winner
    net = [0, 0]
    net[winner] = contributions[loser]
    net[loser] = -contributions[loser]
    return Outcome(kind="showdown", winner=winner, net_chips=tuple(net))


def apply_action(state: GameState, action: str) -> GameState:
    """Apply one action, closing rounds and settling terminals as needed."""
    if state.terminal:
        raise GameOverError("game over")
    legal = legal_actions(state)
    if action not in legal:
        _reject(state, action)
    p = state.to_act
    o = 1 - p
    contributions = list(state.contributions)
    raises = state.raises_this_round
    if action == RAISE:
        contributions[p] = contributions[o] + RAISE_SIZE[state.round_name]
        raises += 1
    elif action == CALL:
        contributions[p] = contributions[o]
    history = state.history + ((p, action),)
    acted = state.actions_this_round + 1
    if action == FOLD:
        net = [0, 0]
        net[o] = contributions[p]
        net[p] = -contributions[p]
        outcome = Outcome(kind="fold", winner=o, net_chips=tuple(net))
        return replace(
            state,
            history=history,
            actions_this_round=acted,
            outcome=outcome,
        )
    round_over = acted >= 2 and contributions[0] == contributions[1]
    if not round_over:
        return replace(
            state,
            contributions=tuple(contributions),
            raises_this_round=raises,
            to_act=o,
            actions_this_round=acted,
            history=history,
        )
    if state.round_name == PREREVEAL:
        revealed = replace(
            state,
            contributions=tuple(contributions),
            public_card=state.pending_public,
            round_name=POSTREVEAL,
            raises_this_round=0,
            actions_this_round=0,
            history=history,
        )
        return replace(revealed, to_act=_round2_opener(revealed))
    outcome = _showdown(state, tuple(contributions))
    return replace(
        state,
        contributions=tuple(contributions),
        history=history,
        actions_this_round=acted,
        outcome=outcome,
    )


def _reject(state: GameState, action: str) -> None:
    p = state.to_act
    mine = state.contributions[p]
    theirs = state.contributions[1 - p]
    if action not in ACTIONS:
        raise IllegalActionError(f"unknown action {action!r}")
    if action == RAISE:
        raise IllegalActionError(
            f"raise rejected: two-bet maximum reached this round "
            f"({state.raises_this_round} raises)"
        )
    if action == CALL:
        raise IllegalActionError(
            f"call rejected: contributions already matched ({mine} vs {theirs})"
        )
    if action == CHECK:
        raise IllegalActionError(
            f"check rejected: facing a bet ({theirs} vs own {mine})"
        )
    raise IllegalActionError(f"{action} rejected in this state")


def settle(state: GameState) -> Outcome:
    """Outcome of a finished game; errors if the game is still live."""
    if state.outcome is None:
        raise EngineError("settle called on a non-terminal state")
    return state.outcome


def observe(state: GameState, player: int) -> RawObservation:
    """The player-visible projection of the state; never leaks the
    opponent's private card."""
    if state.terminal:
        raise GameOverError("game over")
    return RawObservation(
        hand=state.private_cards[player],
        public_card=state.public_card,
        all_chips=(state.contributions[1 - player], state.contributions[player]),
        my_chips=state.contributions[player],
        legal_actions=tuple(_legal_for(state, player)),
    )


def enumerate_deals() -> list[tuple[str, str, str]]:
    """All ordered (player0, player1, public) card assignments."""
    deals = []
    for c0 in DECK:
        for c1 in DECK:
            if c1 == c0:
                continue
            for pub in DECK:
                if pub in (c0, c1):
                    continue
                deals.append((c0, c1, pub))
    return deals
