"""Posterior over the opponent's hidden card and the self outcome assessment.

The environmental belief is sequential Bayes: a deck-counting prior over the
opponent's rank, multiplied by one likelihood factor per observed opponent
action this game, each factor read from the environmental pattern table for
the round the action was taken in. A small floor keeps a single zero-probability
observation from annihilating the posterior; structurally impossible ranks
(both copies visible) stay at exactly zero through the prior.

The self belief turns that posterior into exact win/draw/lose probabilities
for an immediate showdown: rank comparison before the reveal, the pair-then-
rank rule after it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .engine import DECK, RANK_NAMES, RANK_ORDER, RANKS, EngineError, RawObservation, rank_of
from .policy import PatternReport, PolicyTable

logger = logging.getLogger(__name__)

LIKELIHOOD_FLOOR = 1e-3
SUM_TOL = 1e-9


@dataclass(frozen=True)
class CardPrior:
    distribution: dict[str, float]

    def __post_init__(self):
        total = sum(self.distribution.values())
        if abs(total - 1.0) > SUM_TOL:
            raise EngineError(f"prior sums to {total}")


@dataclass(frozen=True)
class BeliefReport:
    posterior: dict[str, float]
    best_combination: str
    evidence: tuple[dict, ...]

    def to_json_dict(self) -> dict:
        return {
            "posterior": {rank: self.posterior[rank] for rank in RANKS},
            "best_combination": self.best_combination,
            "evidence": list(self.evidence),
        }


@dataclass(frozen=True)
class SelfBelief:
    advantages: str
    disadvantages: str
    win_now: float
    lose_now: float
    draw_now: float
    long_term_note: str

    def to_json_dict(self) -> dict:
        return {
            "advantages": self.advantages,
            "disadvantages": self.disadvantages,
            "win_now": self.win_now,
            "lose_now": self.lose_now,
            "draw_now": self.draw_now,
            "long_term_note": self.long_term_note,
        }


def prior(my_card: str, public_card: str | None = None) -> CardPrior:
    """Deck-counting distribution over the opponent's rank given the cards
    visible to the player."""
    visible = [my_card] + ([public_card] if public_card else [])
    if len(set(visible)) != len(visible):
        raise EngineError(f"duplicate visible cards: {visible}")
    for card in visible:
        if card not in DECK:
            raise EngineError(f"unknown card {card!r}")
    remaining = [c for c in DECK if c not in visible]
    n = len(remaining)
    dist = {rank: sum(1 for c in remaining if rank_of(c) == rank) / n for rank in RANKS}
    return CardPrior(distribution=dist)


def _pattern_table(pattern) -> PolicyTable:
    return pattern.table if isinstance(pattern, PatternReport) else pattern


def environmental_belief(
    obs: RawObservation,
    opp_actions,
    pattern_env,
    floor: float = LIKELIHOOD_FLOOR,
) -> BeliefReport:
    """Posterior over the opponent's rank from their actions this game.

    ``opp_actions`` is the opponent's action history this game as
    (action, round) pairs, in order.
    """
    table = _pattern_table(pattern_env)
    base = prior(obs.hand, obs.public_card).distribution
    weights = dict(base)
    evidence = []
    for action, ctx in opp_actions:
        factors = {}
        for rank in RANKS:
            p = table.prob(rank, ctx, action)
            floored = p < floor
            factors[rank] = floor if floored else p
            if floored and weights[rank] > 0:
                logger.debug("likelihood floor applied: P(%s|%s,%s)=%g", action, rank, ctx, p)
        weights = {rank: weights[rank] * factors[rank] for rank in RANKS}
        evidence.append({"action": action, "round": ctx, "factors": factors})
    total = sum(weights.values())
    if total <= 0:
        # Possible only with a degenerate prior; fall back to the prior itself.
        posterior = dict(base)
    else:
        posterior = {rank: w / total for rank, w in weights.items()}
    return BeliefReport(
        posterior=posterior,
        best_combination=_best_combination(posterior, obs.public_card),
        evidence=tuple(evidence),
    )


def _best_combination(posterior: dict[str, float], public_card: str | None) -> str:
    likely = max(RANKS, key=lambda r: (posterior[r], RANK_ORDER[r]))
    if public_card is not None:
        pub = rank_of(public_card)
        if posterior[pub] > 0:
            return f"a pair of {RANK_NAMES[pub]}s with the public card"
        return f"high card {RANK_NAMES[likely]} (no pair possible)"
    return f"most likely a {RANK_NAMES[likely]}; pairs the board if one is revealed"


def showdown_rates(my_rank: str, posterior: dict[str, float], public_rank: str | None):
    """Exact (win, lose, draw) if hands were compared right now."""
    win = lose = draw = 0.0
    for opp_rank, w in posterior.items():
        if w <= 0:
            continue
        if public_rank is None:
            if RANK_ORDER[my_rank] > RANK_ORDER[opp_rank]:
                win += w
            elif RANK_ORDER[my_rank] < RANK_ORDER[opp_rank]:
                lose += w
            else:
                draw += w
            continue
        if my_rank == public_rank:
            win += w
        elif opp_rank == public_rank:
            lose += w
        elif RANK_ORDER[my_rank] > RANK_ORDER[opp_rank]:
            win += w
        elif RANK_ORDER[my_rank] < RANK_ORDER[opp_rank]:
            lose += w
        else:
            draw += w
    return win, lose, draw


def self_belief(obs: RawObservation, pattern_self, env_belief: BeliefReport) -> SelfBelief:
    """Own-outcome assessment against the environmental posterior."""
    my_rank = rank_of(obs.hand)
    public_rank = rank_of(obs.public_card) if obs.public_card else None
    win, lose, draw = showdown_rates(my_rank, env_belief.posterior, public_rank)
    paired = public_rank is not None and my_rank == public_rank
    if paired:
        advantages = (
            f"my {RANK_NAMES[my_rank]} pairs the public card; nothing beats it now"
        )
    elif win >= max(lose, draw):
        advantages = f"holding {RANK_NAMES[my_rank]} is ahead of the likely opponent range"
    else:
        advantages = f"a {RANK_NAMES[my_rank]} still wins against lower ranks"
    if lose > 0:
        disadvantages = f"loses to stronger holdings with probability {lose:.3f}"
    else:
        disadvantages = "no losing holdout remains"
    table = _pattern_table(pattern_self)
    style_note = (
        "press the advantage while ahead" if win > lose else "keep the pot small while behind"
    )
    long_term = (
        f"over the match, {style_note}; own pattern currently favours "
        f"{max(table.rows[(my_rank, obs.round_name)], key=table.rows[(my_rank, obs.round_name)].get)}"
        f" with this rank"
    )
    return SelfBelief(
        advantages=advantages,
        disadvantages=disadvantages,
        win_now=win,
        lose_now=lose,
        draw_now=draw,
        long_term_note=long_term,
    )
