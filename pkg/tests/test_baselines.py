"""CFR training, exploitability, and the fixed opponents."""

import random

import pytest

from leduclab.baselines import (
    CFRAgent,
    CFRPolicy,
    RandomAgent,
    RuleAgent,
    TableAgent,
    cfr_train,
    exploitability,
    regret_matching,
    uniform_policy,
)
from leduclab.engine import (
    DECK,
    PREREVEAL,
    POSTREVEAL,
    apply_action,
    deal,
    legal_actions,
    new_game,
    observe,
    rank_of,
    settle,
)
from leduclab.gametree import build_tree, infoset_key

from conftest import random_table
from oracles import best_response_value as br_oracle


def test_regret_matching_examples():
    assert regret_matching([2, -1, 0]) == pytest.approx([1.0, 0.0, 0.0])
    assert regret_matching([-3, -1]) == pytest.approx([0.5, 0.5])
    assert regret_matching([1, 3]) == pytest.approx([0.25, 0.75])


def enumerate_infosets(round2_first_actor="small_blind"):
    """Independent sweep of reachable information sets via raw engine states."""
    from dataclasses import replace

    keys = set()
    letters = {"raise": "r", "call": "c", "check": "k", "fold": "f"}

    def walk(state, r1, r2):
        if state.terminal:
            return
        player = state.to_act
        rank = rank_of(state.private_cards[player])
        pub = rank_of(state.public_card) if state.public_card else None
        keys.add(infoset_key(rank, pub, r1, r2))
        for action in legal_actions(state):
            nxt = apply_action(state, action)
            crossed = state.round_name == PREREVEAL and nxt.round_name == POSTREVEAL and not nxt.terminal
            if crossed:
                for pub_card in [c for c in DECK if c not in state.private_cards]:
                    branch = replace(nxt, pending_public=pub_card, public_card=pub_card)
                    walk(branch, r1 + letters[action], "")
            elif state.round_name == PREREVEAL:
                walk(nxt, r1 + letters[action], r2)
            else:
                walk(nxt, r1, (r2 or "") + letters[action])

    for c0 in DECK:
        for c1 in DECK:
            if c1 == c0:
                continue
            placeholder = next(c for c in DECK if c not in (c0, c1))
            walk(deal((c0, c1), placeholder, round2_first_actor=round2_first_actor), "", None)
    return keys


def test_infoset_count_pinned():
    keys = enumerate_infosets()
    tree = build_tree()
    assert set(tree.iset_keys) == keys
    assert len(keys) == 288  # order 10^2
    assert 100 <= len(keys) < 1000


def test_one_iteration_average_strategy_uniform():
    policy = cfr_train(1)
    for key, row in policy.strategy.items():
        n = len(policy.actions[key])
        for action in policy.actions[key]:
            assert row[action] == pytest.approx(1.0 / n)


def test_uniform_exploitability_matches_oracle():
    policy = uniform_policy()
    got = exploitability(policy)
    br0 = br_oracle(policy.strategy, 0)
    br1 = br_oracle(policy.strategy, 1)
    assert got == pytest.approx((br0 + br1) / 2, abs=1e-9)
    assert got >= 0


def test_trained_exploitability_matches_oracle():
    policy = cfr_train(300)
    got = exploitability(policy)
    br0 = br_oracle(policy.strategy, 0)
    br1 = br_oracle(policy.strategy, 1)
    assert got == pytest.approx((br0 + br1) / 2, abs=1e-9)


def test_exploitability_decreases_with_training():
    snaps = {}
    policy = cfr_train(2000, checkpoints=[200], on_checkpoint=lambda t, p: snaps.update({t: p}))
    early = exploitability(snaps[200])
    late = exploitability(policy)
    assert late >= 0
    assert late <= early + 1e-6


def test_equal_policies_equal_exploitability():
    a = uniform_policy()
    b = CFRPolicy.from_json_dict(a.to_json_dict())
    assert exploitability(a) == pytest.approx(exploitability(b))


def test_cfr_training_deterministic():
    a = cfr_train(150)
    b = cfr_train(150)
    assert a.strategy == b.strategy


def test_policy_json_round_trip(tmp_path):
    policy = cfr_train(100)
    path = tmp_path / "policy.json"
    policy.save(path)
    again = CFRPolicy.load(path)
    assert again.iterations == policy.iterations
    for key in policy.strategy:
        for action in policy.actions[key]:
            assert again.strategy[key][action] == pytest.approx(policy.strategy[key][action])


def test_uncovered_infoset_errors():
    from leduclab.baselines import BaselineError

    policy = uniform_policy()
    with pytest.raises(BaselineError):
        policy.action_distribution("K::rrrr")


def test_rule_agent_table_lookup():
    agent = RuleAgent()
    king = observe(deal(("HK", "SQ"), "SJ", small_blind_player=0), 0)
    assert agent.act(king) == "raise"
    jack_facing = observe(apply_action(deal(("HK", "HJ"), "SJ", small_blind_player=0), "raise"), 1)
    assert agent.act(jack_facing) == "fold"
    queen_facing = observe(apply_action(deal(("HK", "HQ"), "SJ", small_blind_player=0), "raise"), 1)
    assert agent.act(queen_facing) == "call"


def test_rule_agent_legal_over_exhaustive_sweep():
    agent = RuleAgent()

    def walk(state):
        if state.terminal:
            return
        obs = observe(state, state.to_act)
        assert agent.act(obs) in obs.legal_actions
        for action in legal_actions(state):
            walk(apply_action(state, action))

    for c0 in ("SJ", "SQ", "SK"):
        for c1 in DECK:
            if c1 == c0:
                continue
            pub = next(c for c in DECK if c not in (c0, c1))
            walk(deal((c0, c1), pub))


def test_random_and_table_agents_stay_legal():
    rng = random.Random(3)
    table_agent = TableAgent(random_table(rng), rng=random.Random(5))
    random_agent = RandomAgent(rng=random.Random(7))
    for seed in range(60):
        state = new_game(seed, small_blind_player=seed % 2)
        while not state.terminal:
            obs = observe(state, state.to_act)
            for agent in (table_agent, random_agent):
                assert agent.act(obs) in obs.legal_actions
            state = apply_action(state, random.Random(seed).choice(legal_actions(state)))


def play_cfr_game(agents, seed, small_blind):
    state = new_game(seed, small_blind_player=small_blind)
    for seat, agent in enumerate(agents):
        agent.begin_game(0, seat, small_blind)
    while not state.terminal:
        seat = state.to_act
        action = agents[seat].act(observe(state, seat))
        for agent in agents:
            agent.observe_step(seat, action, state.round_name)
        state = apply_action(state, action)
    return settle(state)


def test_cfr_agent_tracks_history_and_stays_legal():
    policy = cfr_train(500)
    rng = random.Random(1)
    total = 0
    for i in range(300):
        agents = (CFRAgent(policy, rng=rng), CFRAgent(policy, rng=rng))
        outcome = play_cfr_game(agents, seed=rng.randrange(10**9), small_blind=i % 2)
        total += outcome.net_chips[0]
    assert abs(total / 300) <= 1.0  # near-symmetric self-play


def test_cfr_self_play_bounded_mean():
    policy = cfr_train(2000)
    rng = random.Random(9)
    agents = (CFRAgent(policy, rng=random.Random(11)), CFRAgent(policy, rng=random.Random(13)))
    total = 0
    n = 10_000
    for i in range(n):
        outcome = play_cfr_game(agents, seed=rng.randrange(10**9), small_blind=i % 2)
        total += outcome.net_chips[0]
    assert -0.5 <= total / n <= 0.5
