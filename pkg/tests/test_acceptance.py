"""Acceptance gate: one test per criterion, each printing a PASS line.

Each criterion pins its tolerance and, where stated, its runtime budget.
Everything here runs scripted with no network access.
"""

import random
import time
from pathlib import Path

import pytest

from leduclab.agent import AgentConfig, EvolvingAgent
from leduclab.baselines import RuleAgent, cfr_train, exploitability
from leduclab.beliefs import environmental_belief
from leduclab.engine import (
    ACTIONS,
    DECK,
    POSTREVEAL,
    PREREVEAL,
    RANKS,
    ROUNDS,
    RawObservation,
    apply_action,
    deal,
    enumerate_deals,
    legal_actions,
    new_game,
    observe,
    settle,
)
from leduclab.harness import AgentSpec, MatchConfig, run_match
from leduclab.memory import GameRecord, GameStep, MemoryStore
from leduclab.plans import DecisionPoint, enumerate_plans
from leduclab.policy import PolicyTable, detect, row_total_variation
from leduclab.reasoners import (
    BackendConfig,
    LLMReasoner,
    ParseError,
    ReasonerRequest,
    ScriptedReasoner,
    extract_distribution,
)

from conftest import play_game, random_actor, random_decision, random_table
from oracles import bayes_posterior, count_actions, plan_values
from test_engine import REFERENCE_TRANSCRIPTS
from test_plans import posterior_at
from test_reasoners import GOLDEN, fixed_requests

EXPECTED_LOGGED_PAYOFFS = (1.0, 0.0, 2.0, 2.0)


def report(name):
    print(f"[acceptance] {name}: PASS")


def test_engine_exhaustiveness():
    started = time.monotonic()
    nets = []

    def sweep(state):
        assert state.raises_this_round <= 2
        assert state.pot == sum(state.contributions)
        if state.terminal:
            outcome = settle(state)
            assert sum(outcome.net_chips) == 0
            nets.append(max(outcome.net_chips))
            return
        for action in legal_actions(state):
            nxt = apply_action(state, action)
            assert nxt.contributions[0] >= state.contributions[0]
            assert nxt.contributions[1] >= state.contributions[1]
            sweep(nxt)

    for c0, c1, pub in enumerate_deals():
        for small_blind in (0, 1):
            sweep(deal((c0, c1), pub, small_blind_player=small_blind))

    assert max(nets) == 14
    assert min(n for n in nets if n > 0) == 1
    elapsed = time.monotonic() - started
    assert elapsed < 60, f"exhaustive sweep took {elapsed:.1f}s"
    report("engine exhaustiveness (zero-sum, conservation, cap, |net| in [1, 14])")


def test_fixture_fidelity():
    payoffs = []
    for transcript in REFERENCE_TRANSCRIPTS:
        state = deal(
            transcript["cards"],
            transcript["public"],
            small_blind_player=transcript["small_blind"],
            round2_first_actor="seat0",
        )
        for step in transcript["steps"]:
            player, action, expected_legal = step[0], step[1], step[2]
            assert state.to_act == player
            assert set(legal_actions(state)) == expected_legal
            state = apply_action(state, action)
        outcome = settle(state)
        assert outcome.winner == transcript["outcome"]["winner"]
        payoffs.append(outcome.logged_payoff)
    assert tuple(payoffs) == EXPECTED_LOGGED_PAYOFFS
    report("fixture fidelity (archived transcripts replay exactly)")


def test_belief_oracle():
    started = time.monotonic()
    rng = random.Random(1234)
    for _ in range(200):
        table = random_table(rng)
        hand = rng.choice(DECK)
        public = rng.choice([c for c in DECK if c != hand]) if rng.random() < 0.5 else None
        n = rng.randrange(0, 5)
        history = [
            (rng.choice(ACTIONS), POSTREVEAL if (public and i >= n // 2) else PREREVEAL)
            for i in range(n)
        ]
        obs = RawObservation(
            hand=hand, public_card=public, all_chips=(2, 2), my_chips=2,
            legal_actions=("raise", "fold", "check"),
        )
        got = environmental_belief(obs, history, table).posterior
        want = bayes_posterior(obs, history, table)
        for rank in RANKS:
            assert abs(got[rank] - want[rank]) <= 1e-9
    elapsed = time.monotonic() - started
    assert elapsed < 10, f"belief oracle took {elapsed:.1f}s"
    report("belief oracle (200 instances within 1e-9)")


def test_plan_oracle():
    started = time.monotonic()
    rng = random.Random(4321)
    for _ in range(500):
        state, history = random_decision(rng)
        table = random_table(rng)
        player = state.to_act
        belief = posterior_at(state, player, history, table)
        point = DecisionPoint.from_state(state, player)
        plans = {p.action: p for p in enumerate_plans(point, belief, table)}
        expected = plan_values(
            history, player, state.private_cards[player], state.small_blind,
            belief, table, public_card=state.public_card,
        )
        assert set(plans) == set(expected)
        for action, stats in expected.items():
            assert abs(plans[action].expected_gain - stats["gain"]) <= 1e-9
            assert abs(plans[action].win_rate - stats["win"]) <= 1e-9
            assert abs(plans[action].lose_rate - stats["lose"]) <= 1e-9
            assert abs(plans[action].draw_rate - stats["draw"]) <= 1e-9
    elapsed = time.monotonic() - started
    assert elapsed < 30, f"plan oracle took {elapsed:.1f}s"
    report("plan oracle (500 instances within 1e-9)")


def _digest_store(records):
    store = MemoryStore()
    for record in records:
        store.append(record)
    return store


def test_detection_oracle():
    rng = random.Random(99)
    for log_index in range(100):
        records = [
            play_game(
                {0: random_actor(rng), 1: random_actor(rng)},
                seed=rng.randrange(10**9),
                small_blind=i % 2,
                game_index=i,
            )
            for i in range(rng.randrange(1, 6))
        ]
        store = _digest_store(records)
        digest = store.digest(perspective=0)
        table = detect(digest, smoothing=0)
        opp_counts, _ = count_actions(records, perspective=0)
        for rank in RANKS:
            for ctx in ROUNDS:
                total = sum(opp_counts.get((rank, ctx, a), 0) for a in ACTIONS)
                for action in ACTIONS:
                    if total == 0:
                        assert table.prob(rank, ctx, action) == 0.25
                    else:
                        assert table.prob(rank, ctx, action) == (
                            opp_counts.get((rank, ctx, action), 0) / total
                        )

    # 500 samples per row from a known policy: detection within TV 0.05.
    sample_rng = random.Random(10)
    truth = random_table(sample_rng)
    counts = {}
    for rank in RANKS:
        for ctx in ROUNDS:
            for _ in range(500):
                draw = sample_rng.random()
                acc = 0.0
                for action in ACTIONS:
                    acc += truth.prob(rank, ctx, action)
                    if draw <= acc:
                        counts[(rank, ctx, action)] = counts.get((rank, ctx, action), 0) + 1
                        break
    from leduclab.memory import HistoryDigest

    synthetic = HistoryDigest(
        window=(0, 1), opponent_counts=counts, own_counts={},
        chip_trajectory=(0,), decision_steps=sum(counts.values()),
    )
    detected = detect(synthetic, smoothing=0)
    for key, row in truth.rows.items():
        assert row_total_variation(row, detected.rows[key]) < 0.05
    report("detection oracle (exact at alpha=0; TV < 0.05 at 500 samples/row)")


def _convergence_run(seed, games, checkpoints):
    agent = EvolvingAgent(backend=ScriptedReasoner(), config=AgentConfig(), rng=random.Random(0))
    opponent = RuleAgent()
    config = MatchConfig(
        agent_a=AgentSpec("evolving"), agent_b=AgentSpec("rule"),
        n_games=games, master_seed=seed,
    )
    agents = (agent, opponent)
    snapshots = {}
    for i in range(games):
        game_seed = config.game_seed(i)
        small_blind = config.small_blind_for(i)
        state = new_game(game_seed, small_blind_player=small_blind)
        for seat, a in enumerate(agents):
            a.begin_game(i, seat, small_blind, "small_blind")
        steps = []
        while not state.terminal:
            seat = state.to_act
            obs = observe(state, seat)
            action = agents[seat].act(obs)
            steps.append(GameStep(player=seat, observation=obs, action=action))
            for a in agents:
                a.observe_step(seat, action, state.round_name)
            state = apply_action(state, action)
        record = GameRecord(
            game_index=i, seed=game_seed, small_blind=small_blind, steps=tuple(steps),
            revealed_cards=state.private_cards, public_card=state.public_card,
            outcome=state.outcome,
        )
        for a in agents:
            a.end_game(record)
        if i + 1 in checkpoints:
            snapshots[i + 1] = agent.env_pattern
    return agent, snapshots


def test_evolution_convergence():
    started = time.monotonic()
    checkpoints = (50, 100, 150, 200)
    agent, snapshots = _convergence_run(seed=2, games=200, checkpoints=checkpoints)
    opp_counts, _ = count_actions(agent.memory.records, perspective=0)

    def worst_tv(pattern):
        worst = 0.0
        for rank in RANKS:
            for ctx in ROUNDS:
                total = sum(opp_counts.get((rank, ctx, a), 0) for a in ACTIONS)
                if total == 0:
                    continue
                truth = {a: opp_counts.get((rank, ctx, a), 0) / total for a in ACTIONS}
                worst = max(worst, row_total_variation(pattern.table.rows[(rank, ctx)], truth))
        return worst

    trajectory = [worst_tv(snapshots[c]) for c in checkpoints]
    assert trajectory[-1] < 0.1, f"final TV {trajectory[-1]:.4f}"
    for earlier, later in zip(trajectory, trajectory[1:]):
        assert later <= earlier, f"TV trend increased: {trajectory}"
    elapsed = time.monotonic() - started
    assert elapsed < 120, f"convergence run took {elapsed:.1f}s"
    report(
        "evolution convergence (200 games: TV "
        + " -> ".join(f"{tv:.3f}" for tv in trajectory) + " < 0.1, non-increasing)"
    )


def test_cfr_quality():
    started = time.monotonic()
    snapshots = {}
    policy = cfr_train(
        100_000, checkpoints=[10_000], on_checkpoint=lambda t, p: snapshots.update({t: p})
    )
    final = exploitability(policy)
    mid = exploitability(snapshots[10_000])
    assert final < 0.1, f"exploitability {final}"
    assert final < mid, f"100k ({final}) not below 10k ({mid})"
    elapsed = time.monotonic() - started
    assert elapsed < 300, f"CFR training took {elapsed:.1f}s"
    report(f"CFR quality (exploitability {final:.5f} < 0.1 and < {mid:.5f} at 10k)")


DIRECTIONAL_SEEDS = (1, 2, 3)


@pytest.mark.parametrize("seed", DIRECTIONAL_SEEDS)
def test_directional_results(seed):
    vs_random = run_match(
        MatchConfig(
            agent_a=AgentSpec("evolving"), agent_b=AgentSpec("random"),
            n_games=2000, master_seed=seed,
        )
    ).totals[0]
    assert vs_random > 0, f"seed {seed}: total vs random {vs_random}"

    full = run_match(
        MatchConfig(
            agent_a=AgentSpec("evolving"), agent_b=AgentSpec("rule"),
            n_games=2000, master_seed=seed,
        )
    ).totals[0]
    no_plan = run_match(
        MatchConfig(
            agent_a=AgentSpec("evolving", options={"ablations": ["plan"]}),
            agent_b=AgentSpec("rule"),
            n_games=2000, master_seed=seed,
        )
    ).totals[0]
    assert full >= no_plan, f"seed {seed}: full {full} < no-plan {no_plan}"
    report(
        f"directional results seed {seed} "
        f"(vs random {vs_random:+d} > 0; full {full:+d} >= no-plan {no_plan:+d})"
    )


def test_scripted_determinism(tmp_path):
    logs = []
    for name in ("first.jsonl", "second.jsonl"):
        path = tmp_path / name
        run_match(
            MatchConfig(
                agent_a=AgentSpec("evolving"), agent_b=AgentSpec("rule"),
                n_games=40, master_seed=17, log_path=str(path),
            )
        )
        logs.append(path.read_bytes())
    assert logs[0] == logs[1]
    assert len(logs[0]) > 0
    report("determinism (identical configs produce byte-identical JSONL)")


def test_llm_path_contract():
    # Golden prompts: rendered templates are byte-stable after substitution.
    reasoner = LLMReasoner(
        BackendConfig(endpoint="http://example.invalid", model="test", backoff_base=0.0),
        transport=lambda payload: "stub",
    )
    for kind, request in fixed_requests().items():
        assert reasoner.build_prompt(request) == (GOLDEN / f"{kind}.prompt.txt").read_text(), kind

    # Distribution extraction per spec.
    full = extract_distribution("raise (70%), call (20%), fold (10%)", ("raise", "call", "fold"))
    assert full.values == pytest.approx({"raise": 0.7, "call": 0.2, "fold": 0.1})
    partial = extract_distribution("raise (50%), call (30%)", ("raise", "call", "fold"))
    assert partial.values == pytest.approx({"raise": 0.625, "call": 0.375, "fold": 0.0})
    assert partial.partial
    with pytest.raises(ParseError):
        extract_distribution("nothing to see", ("raise", "call"))

    # Stubbed transport: text preserved verbatim, provenance llm.
    text = "villain tends to have J (20%), Q (30%), K (50%)"
    stubbed = LLMReasoner(
        BackendConfig(endpoint="http://example.invalid", model="t", backoff_base=0.0),
        transport=lambda payload: text,
    )
    response = stubbed.complete(fixed_requests()["belief_env"])
    assert response.provenance == "llm"
    assert response.text == text

    # Failing transport: retries exhausted, scripted fallback payload present.
    calls = []

    def failing(payload):
        calls.append(1)
        raise ConnectionError("down")

    fallback = LLMReasoner(
        BackendConfig(endpoint="http://example.invalid", model="t",
                      max_retries=3, backoff_base=0.0),
        transport=failing,
    )
    response = fallback.complete(fixed_requests()["belief_env"])
    assert len(calls) == 4
    assert response.provenance == "fallback"
    assert sum(response.structured.posterior.values()) == pytest.approx(1.0)
    report("LLM-path contract (golden prompts, extraction, fallback; no network)")
