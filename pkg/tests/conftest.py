import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `oracles`

from leduclab.engine import ACTIONS, RANKS, ROUNDS, apply_action, legal_actions, new_game, observe
from leduclab.memory import GameRecord, GameStep
from leduclab.policy import PolicyTable


def play_game(actors, seed=0, small_blind=0, round2_first_actor="small_blind", game_index=0):
    """Drive one game with a callable(obs) -> action per seat; returns the record."""
    state = new_game(seed, small_blind_player=small_blind, round2_first_actor=round2_first_actor)
    steps = []
    while not state.terminal:
        player = state.to_act
        obs = observe(state, player)
        action = actors[player](obs)
        steps.append(GameStep(player=player, observation=obs, action=action))
        state = apply_action(state, action)
    return GameRecord(
        game_index=game_index,
        seed=seed,
        small_blind=small_blind,
        steps=tuple(steps),
        revealed_cards=state.private_cards,
        public_card=state.public_card,
        outcome=state.outcome,
        round2_first_actor=round2_first_actor,
    )


def random_actor(rng):
    return lambda obs: rng.choice(list(obs.legal_actions))


def random_table(rng, support=None):
    """Random row-stochastic policy table with full-mass rows."""
    support = support or {ctx: ACTIONS for ctx in ROUNDS}
    rows = {}
    for ctx in ROUNDS:
        legal = support[ctx]
        for rank in RANKS:
            weights = {a: (rng.random() + 0.05 if a in legal else 0.0) for a in ACTIONS}
            total = sum(weights.values())
            rows[(rank, ctx)] = {a: w / total for a, w in weights.items()}
    return PolicyTable(rows=rows, support=support)


def random_decision(rng, max_steps=6):
    """Random live mid-game state: (state, history list) with someone to act."""
    while True:
        seed = rng.randrange(10**9)
        small_blind = rng.randrange(2)
        state = new_game(seed, small_blind_player=small_blind)
        history = []
        for _ in range(rng.randrange(max_steps + 1)):
            if state.terminal:
                break
            action = rng.choice(legal_actions(state))
            history.append((state.to_act, action))
            state = apply_action(state, action)
        if not state.terminal:
            return state, history


@pytest.fixture
def rng():
    return random.Random(20240613)
