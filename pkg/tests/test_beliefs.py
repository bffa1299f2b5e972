"""Card priors, sequential-Bayes posteriors, and self outcome assessment."""

import random

import pytest

from leduclab.beliefs import environmental_belief, prior, self_belief
from leduclab.engine import (
    DECK,
    PREREVEAL,
    POSTREVEAL,
    RANKS,
    ROUNDS,
    ACTIONS,
    EngineError,
    RawObservation,
)
from leduclab.policy import PolicyTable

from conftest import random_table
from oracles import bayes_posterior


def obs_for(hand, public=None, legal=("raise", "fold", "check")):
    return RawObservation(
        hand=hand, public_card=public, all_chips=(2, 2), my_chips=2,
        legal_actions=tuple(legal),
    )


def pattern_from_raise_probs(probs):
    rows = {}
    for ctx in ROUNDS:
        for rank in RANKS:
            p = probs[rank]
            rows[(rank, ctx)] = {
                "raise": p, "call": (1 - p) / 2, "check": (1 - p) / 2, "fold": 0.0,
            }
    return PolicyTable(rows=rows)


def test_prior_deck_counting_no_public():
    dist = prior("HJ").distribution
    assert dist["J"] == pytest.approx(1 / 5)
    assert dist["Q"] == pytest.approx(2 / 5)
    assert dist["K"] == pytest.approx(2 / 5)


def test_prior_excludes_fully_visible_rank():
    dist = prior("HJ", "SJ").distribution
    assert dist["J"] == 0.0
    assert dist["Q"] == pytest.approx(0.5)
    assert dist["K"] == pytest.approx(0.5)


def test_prior_sums_to_one_everywhere():
    for card in DECK:
        assert sum(prior(card).distribution.values()) == pytest.approx(1.0)
        for public in DECK:
            if public == card:
                continue
            assert sum(prior(card, public).distribution.values()) == pytest.approx(1.0)


def test_prior_rejects_duplicates():
    with pytest.raises(EngineError):
        prior("HJ", "HJ")


def test_uniform_pattern_posterior_equals_prior():
    report = environmental_belief(
        obs_for("HQ"), [("raise", PREREVEAL)], PolicyTable.uniform()
    )
    base = prior("HQ").distribution
    for rank in RANKS:
        assert report.posterior[rank] == pytest.approx(base[rank])


def test_hand_computed_posterior_after_one_raise():
    # Frozen by hand: prior (1/5, 2/5, 2/5) times raise likelihood
    # (0.1, 0.3, 0.9) normalizes to (0.04, 0.24, 0.72).
    pattern = pattern_from_raise_probs({"J": 0.1, "Q": 0.3, "K": 0.9})
    report = environmental_belief(obs_for("HJ"), [("raise", PREREVEAL)], pattern)
    assert report.posterior["J"] == pytest.approx(0.04)
    assert report.posterior["Q"] == pytest.approx(0.24)
    assert report.posterior["K"] == pytest.approx(0.72)


def test_posterior_matches_enumeration_oracle(rng):
    for trial in range(200):
        table = random_table(rng)
        hand = rng.choice(DECK)
        if rng.random() < 0.5:
            public = rng.choice([c for c in DECK if c != hand])
        else:
            public = None
        n_actions = rng.randrange(0, 5)
        history = []
        for i in range(n_actions):
            ctx = POSTREVEAL if (public is not None and i >= n_actions // 2) else PREREVEAL
            history.append((rng.choice(ACTIONS), ctx))
        report = environmental_belief(obs_for(hand, public), history, table)
        expected = bayes_posterior(obs_for(hand, public), history, table)
        for rank in RANKS:
            assert report.posterior[rank] == pytest.approx(expected[rank], abs=1e-9)


def test_monotone_likelihood_in_raise_probability():
    lo = pattern_from_raise_probs({"J": 0.2, "Q": 0.2, "K": 0.4})
    hi = pattern_from_raise_probs({"J": 0.2, "Q": 0.2, "K": 0.8})
    obs = obs_for("HJ")
    after_lo = environmental_belief(obs, [("raise", PREREVEAL)], lo).posterior["K"]
    after_hi = environmental_belief(obs, [("raise", PREREVEAL)], hi).posterior["K"]
    assert after_hi > after_lo


def test_impossible_rank_stays_zero():
    table = random_table(random.Random(2))
    report = environmental_belief(
        obs_for("HJ", "SJ"), [("raise", PREREVEAL), ("raise", POSTREVEAL)], table
    )
    assert report.posterior["J"] == 0.0


def test_zero_likelihood_is_floored_not_annihilated():
    pattern = pattern_from_raise_probs({"J": 0.0, "Q": 0.5, "K": 0.5})
    report = environmental_belief(obs_for("HQ"), [("raise", PREREVEAL)], pattern)
    assert report.posterior["J"] > 0.0  # floored at 1e-3, not erased
    assert all(f > 0 for e in report.evidence for f in e["factors"].values())


def test_self_belief_pair_is_unbeatable():
    env = environmental_belief(obs_for("HK", "SK"), [], PolicyTable.uniform())
    belief = self_belief(obs_for("HK", "SK"), PolicyTable.uniform(), env)
    assert belief.win_now == pytest.approx(1.0)
    assert belief.lose_now == 0.0


def test_self_belief_prereveal_rank_comparison():
    from leduclab.beliefs import BeliefReport

    env = BeliefReport(
        posterior={"J": 0.2, "Q": 0.4, "K": 0.4}, best_combination="", evidence=()
    )
    belief = self_belief(obs_for("HQ"), PolicyTable.uniform(), env)
    assert belief.win_now == pytest.approx(0.2)
    assert belief.draw_now == pytest.approx(0.4)
    assert belief.lose_now == pytest.approx(0.4)


def test_self_belief_probabilities_partition(rng):
    for _ in range(50):
        table = random_table(rng)
        hand = rng.choice(DECK)
        public = rng.choice([c for c in DECK if c != hand]) if rng.random() < 0.5 else None
        history = [("raise", PREREVEAL)] if rng.random() < 0.5 else []
        env = environmental_belief(obs_for(hand, public), history, table)
        belief = self_belief(obs_for(hand, public), table, env)
        assert belief.win_now + belief.lose_now + belief.draw_now == pytest.approx(1.0, abs=1e-9)
