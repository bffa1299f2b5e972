"""Plan enumeration: one candidate plan per legal action, scored exactly.

Each plan's expected chip gain, win/lose/draw rates and payoffs come from an
exact expectation over the remaining game tree:

- opponent decision nodes are weighted by the environmental pattern table,
  restricted to the legal actions at that node and renormalized;
- the public-card reveal is uniform over the undealt cards, folded to rank
  counts (ranks are all that matter for showdowns);
- the agent's own future nodes maximize expected gain (a self-policy-weighted
  lookahead is available behind ``lookahead="policy"``);
- terminal payoffs follow the engine's settlement: the winner nets the
  loser's contribution, a fold forfeits the folder's contribution.

All quantities are net chips for the planning player over the whole game.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .engine import (
    ACTIONS,
    CALL,
    CHECK,
    FOLD,
    MAX_RAISES_PER_ROUND,
    POSTREVEAL,
    PREREVEAL,
    RAISE,
    RAISE_SIZE,
    RANK_ORDER,
    RANKS,
    EngineError,
    RawObservation,
    rank_of,
)
from .policy import PatternReport, PolicyTable

RATE_TOL = 1e-9

# expected gain, win rate, lose rate, draw rate, win part, lose part
_ZERO = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class DecisionPoint:
    """Everything the planner needs about the live game, derived from the
    player's own view: the observation plus two bits the observation alone
    cannot disambiguate (who opens round two, and whether the opponent has
    already acted this round)."""

    obs: RawObservation
    acts_first_postreveal: bool
    opponent_acted_this_round: bool

    @property
    def round_name(self) -> str:
        return self.obs.round_name

    @property
    def my_contrib(self) -> int:
        return self.obs.my_chips

    @property
    def opp_contrib(self) -> int:
        return self.obs.all_chips[0]

    @property
    def raises_so_far(self) -> int:
        diff = self.opp_contrib - self.my_contrib
        if diff < 0:
            raise EngineError("planner cannot act while ahead of the opponent")
        if diff == 0:
            return 0
        if diff == 1:
            return 0  # facing the big blind, not a raise
        return 1 if RAISE in self.obs.legal_actions else MAX_RAISES_PER_ROUND

    @classmethod
    def from_state(cls, state, player: int):
        from .engine import observe

        if state.to_act != player:
            raise EngineError("decision point requires the player to act")
        if state.round2_first_actor == "small_blind":
            opener = state.small_blind
        elif state.round2_first_actor == "big_blind":
            opener = 1 - state.small_blind
        else:
            opener = 0
        return cls(
            obs=observe(state, player),
            acts_first_postreveal=(opener == player),
            opponent_acted_this_round=state.actions_this_round > 0,
        )


@dataclass(frozen=True)
class RankBreakdown:
    rank: str
    weight: float
    response: dict | None  # opponent's immediate reply distribution, if any
    win_rate: float
    lose_rate: float
    draw_rate: float
    gain: float


@dataclass(frozen=True)
class PlanEvaluation:
    action: str
    win_rate: float
    lose_rate: float
    draw_rate: float
    win_payoff: float
    lose_payoff: float
    expected_gain: float
    breakdown: tuple[RankBreakdown, ...]

    def to_json_dict(self) -> dict:
        return {
            "action": self.action,
            "win_rate": self.win_rate,
            "lose_rate": self.lose_rate,
            "draw_rate": self.draw_rate,
            "win_payoff": self.win_payoff,
            "lose_payoff": self.lose_payoff,
            "expected_gain": self.expected_gain,
            "breakdown": [
                {
                    "rank": b.rank,
                    "weight": b.weight,
                    "response": b.response,
                    "win_rate": b.win_rate,
                    "lose_rate": b.lose_rate,
                    "draw_rate": b.draw_rate,
                    "gain": b.gain,
                }
                for b in self.breakdown
            ],
        }


@dataclass(frozen=True)
class PlanChoice:
    ranked: tuple[PlanEvaluation, ...]
    best: PlanEvaluation
    rationale: str

    def to_json_dict(self) -> dict:
        return {
            "ranked": [p.to_json_dict() for p in self.ranked],
            "best": self.best.action,
            "rationale": self.rationale,
        }


STYLE_ORDERS = {
    "aggressive": (RAISE, CALL, CHECK, FOLD),
    "conservative": (FOLD, CHECK, CALL, RAISE),
    "neutral": ACTIONS,
    "flexible": ACTIONS,
}


def _public_rank_counts(my_rank: str, opp_rank: str) -> list[tuple[str, int]]:
    # Two copies of each rank; one is gone per matching visible card.
    counts = []
    for rank in RANKS:
        n = 2 - (rank == my_rank) - (rank == opp_rank)
        if n > 0:
            counts.append((rank, n))
    return counts


def _showdown_net(my_rank: str, opp_rank: str, public_rank: str, contrib: int):
    if my_rank == public_rank:
        return contrib
    if opp_rank == public_rank:
        return -contrib
    if RANK_ORDER[my_rank] > RANK_ORDER[opp_rank]:
        return contrib
    if RANK_ORDER[my_rank] < RANK_ORDER[opp_rank]:
        return -contrib
    return 0


def _terminal(net: float):
    if net > 0:
        return (net, 1.0, 0.0, 0.0, net, 0.0)
    if net < 0:
        return (net, 0.0, 1.0, 0.0, 0.0, net)
    return (0.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def _scale(stats, w: float):
    return tuple(x * w for x in stats)


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _legal_at(my_c: int, opp_c: int, raises: int, mover: str) -> list[str]:
    mine, theirs = (my_c, opp_c) if mover == "me" else (opp_c, my_c)
    can_raise = raises < MAX_RAISES_PER_ROUND
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


class _Lookahead:
    """Expectation over the remaining tree for one (my rank, opp rank) pair."""

    def __init__(self, my_rank, opp_rank, pattern: PolicyTable, self_policy, lookahead, me_first_r2):
        self.my_rank = my_rank
        self.opp_rank = opp_rank
        self.pattern = pattern
        self.self_policy = self_policy
        self.lookahead = lookahead
        self.me_first_r2 = me_first_r2

    def after_action(self, mover, action, my_c, opp_c, raises, round_name, acted, public_rank):
        """Stats once ``mover`` plays ``action`` from the given spot."""
        if action == FOLD:
            return _terminal(-my_c if mover == "me" else opp_c)
        if action == RAISE:
            if mover == "me":
                my_c = opp_c + RAISE_SIZE[round_name]
            else:
                opp_c = my_c + RAISE_SIZE[round_name]
            raises += 1
        elif action == CALL:
            if mover == "me":
                my_c = opp_c
            else:
                opp_c = my_c
        acted += 1
        if acted >= 2 and my_c == opp_c:
            if round_name == PREREVEAL:
                return self._reveal(my_c, opp_c)
            return _terminal(_showdown_net(self.my_rank, self.opp_rank, public_rank, my_c))
        nxt = "opp" if mover == "me" else "me"
        return self.node(nxt, my_c, opp_c, raises, round_name, acted, public_rank)

    def _reveal(self, my_c, opp_c):
        counts = _public_rank_counts(self.my_rank, self.opp_rank)
        total = sum(n for _, n in counts)
        stats = _ZERO
        opener = "me" if self.me_first_r2 else "opp"
        for rank, n in counts:
            sub = self.node(opener, my_c, opp_c, 0, POSTREVEAL, 0, rank)
            stats = _add(stats, _scale(sub, n / total))
        return stats

    def node(self, mover, my_c, opp_c, raises, round_name, acted, public_rank):
        legal = _legal_at(my_c, opp_c, raises, mover)
        if mover == "opp":
            dist = self.pattern.response_distribution(self.opp_rank, round_name, legal)
            stats = _ZERO
            for action, p in dist.items():
                if p == 0.0:
                    continue
                sub = self.after_action("opp", action, my_c, opp_c, raises, round_name, acted, public_rank)
                stats = _add(stats, _scale(sub, p))
            return stats
        if self.lookahead == "policy" and self.self_policy is not None:
            dist = self.self_policy.response_distribution(self.my_rank, round_name, legal)
            stats = _ZERO
            for action, p in dist.items():
                if p == 0.0:
                    continue
                sub = self.after_action("me", action, my_c, opp_c, raises, round_name, acted, public_rank)
                stats = _add(stats, _scale(sub, p))
            return stats
        best = None
        for action in ACTIONS:  # canonical order breaks expectation ties
            if action not in legal:
                continue
            sub = self.after_action("me", action, my_c, opp_c, raises, round_name, acted, public_rank)
            if best is None or sub[0] > best[0] + RATE_TOL:
                best = sub
        return best

    def opponent_reply(self, my_c, opp_c, raises, round_name):
        legal = _legal_at(my_c, opp_c, raises, "opp")
        return self.pattern.response_distribution(self.opp_rank, round_name, legal)


def _posterior_of(belief) -> dict[str, float]:
    if hasattr(belief, "posterior"):
        return dict(belief.posterior)
    return dict(belief)


def _pattern_table(pattern) -> PolicyTable:
    return pattern.table if isinstance(pattern, PatternReport) else pattern


def enumerate_plans(
    point: DecisionPoint,
    belief,
    pattern_env,
    self_policy: PolicyTable | None = None,
    lookahead: str = "max",
) -> list[PlanEvaluation]:
    """One scored plan per legal action at the decision point.

    ``belief`` is a posterior over the opponent's rank (a mapping or a
    BeliefReport); ``pattern_env`` models the opponent's responses.
    """
    pattern = _pattern_table(pattern_env)
    posterior = _posterior_of(belief)
    obs = point.obs
    my_rank = rank_of(obs.hand)
    public_rank = rank_of(obs.public_card) if obs.public_card else None
    round_name = point.round_name
    raises = point.raises_so_far
    acted = 1 if point.opponent_acted_this_round else 0
    plans = []
    for action in obs.legal_actions:
        breakdown = []
        total = _ZERO
        for opp_rank in RANKS:
            weight = posterior.get(opp_rank, 0.0)
            if weight <= 0.0:
                continue
            walker = _Lookahead(
                my_rank, opp_rank, pattern, self_policy, lookahead, point.acts_first_postreveal
            )
            stats = walker.after_action(
                "me", action, point.my_contrib, point.opp_contrib,
                raises, round_name, acted, public_rank,
            )
            response = _immediate_reply(walker, point, action, raises, round_name, acted)
            breakdown.append(
                RankBreakdown(
                    rank=opp_rank,
                    weight=weight,
                    response=response,
                    win_rate=stats[1],
                    lose_rate=stats[2],
                    draw_rate=stats[3],
                    gain=stats[0],
                )
            )
            total = _add(total, _scale(stats, weight))
        ev, win, lose, draw, win_part, lose_part = total
        plans.append(
            PlanEvaluation(
                action=action,
                win_rate=win,
                lose_rate=lose,
                draw_rate=draw,
                win_payoff=(win_part / win) if win > RATE_TOL else 0.0,
                lose_payoff=(-lose_part / lose) if lose > RATE_TOL else 0.0,
                expected_gain=ev,
                breakdown=tuple(breakdown),
            )
        )
    return plans


def _immediate_reply(walker, point, action, raises, round_name, acted):
    """Opponent's next-action distribution when they reply in this round."""
    if action == FOLD:
        return None
    my_c, opp_c = point.my_contrib, point.opp_contrib
    if action == RAISE:
        my_c = opp_c + RAISE_SIZE[round_name]
        raises += 1
    elif action == CALL:
        my_c = opp_c
    if acted + 1 >= 2 and my_c == opp_c:
        return None  # round closes; no same-round reply
    return walker.opponent_reply(my_c, opp_c, raises, round_name)


def select_best(plans, style: str = "neutral") -> PlanChoice:
    """Rank plans by expected gain; break exact ties by the style's action
    preference, then by the canonical action order."""
    if not plans:
        raise ValueError("select_best requires at least one plan")
    order = STYLE_ORDERS.get(style, ACTIONS)
    ranked = sorted(
        plans,
        key=lambda p: (-p.expected_gain, order.index(p.action), ACTIONS.index(p.action)),
    )
    best = ranked[0]
    rationale = (
        f"{best.action} has the highest expected chip gain "
        f"({best.expected_gain:+.3f}, win rate {best.win_rate:.3f})"
        + (f"; ties broken {style}" if len(ranked) > 1
           and abs(ranked[1].expected_gain - best.expected_gain) <= RATE_TOL else "")
    )
    return PlanChoice(ranked=tuple(ranked), best=best, rationale=rationale)


def act(choice: PlanChoice, mode: str = "greedy", temperature: float = 1.0, rng=None) -> str:
    """Pick the action for a plan choice.

    greedy returns the best plan's action; sampled draws from a softmax over
    expected gains at the given temperature (low temperature approaches
    greedy)."""
    if mode == "greedy":
        return choice.best.action
    if mode != "sampled":
        raise ValueError(f"unknown act mode {mode!r}")
    if temperature <= 1e-9:
        return choice.best.action
    rng = rng or random.Random()
    gains = [p.expected_gain for p in choice.ranked]
    peak = max(gains)
    weights = [math.exp((g - peak) / temperature) for g in gains]
    total = sum(weights)
    draw = rng.random() * total
    acc = 0.0
    for plan, w in zip(choice.ranked, weights):
        acc += w
        if draw <= acc:
            return plan.action
    return choice.ranked[-1].action


def best_response_action(rank: str, ctx: str, env_pattern, me_first_r2: bool = True) -> str:
    """Action with the highest lookahead value from a canonical decision spot
    for (own rank, round): the opening decision as the 1-chip blind before
    the reveal, or first to act at matched 2-chip contributions after it
    (averaged over possible public cards)."""
    pattern = _pattern_table(env_pattern)
    remaining = {r: 2 - (r == rank) for r in RANKS}
    total = sum(remaining.values())
    if ctx == PREREVEAL:
        gains = {}
        for action in (RAISE, CALL, FOLD):
            ev = 0.0
            for opp_rank, n in remaining.items():
                if n == 0:
                    continue
                walker = _Lookahead(rank, opp_rank, pattern, None, "max", me_first_r2)
                ev += (n / total) * walker.after_action("me", action, 1, 2, 0, PREREVEAL, 0, None)[0]
            gains[action] = ev
    else:
        gains = {}
        for action in (RAISE, CHECK, FOLD):
            ev = 0.0
            for public_rank, n_pub in remaining.items():
                if n_pub == 0:
                    continue
                rest = {
                    r: 2 - (r == rank) - (r == public_rank) for r in RANKS
                }
                rest_total = sum(rest.values())
                sub_ev = 0.0
                for opp_rank, n in rest.items():
                    if n == 0:
                        continue
                    walker = _Lookahead(rank, opp_rank, pattern, None, "max", me_first_r2)
                    sub_ev += (n / rest_total) * walker.after_action(
                        "me", action, 2, 2, 0, POSTREVEAL, 0, public_rank
                    )[0]
                ev += (n_pub / total) * sub_ev
            gains[action] = ev
    return max(gains, key=lambda a: (gains[a], -ACTIONS.index(a)))
