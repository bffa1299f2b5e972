"""Baseline opponents: vanilla CFR, a fixed rule table, uniform random.

CFR runs full-tree traversals with alternating regret updates over the
flattened game tree; the average strategy comes from reach-weighted strategy
sums. Exploitability is the mean of both exact best-response values against
that average strategy.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import ACTIONS, POSTREVEAL, PREREVEAL, RawObservation, rank_of
from .gametree import (
    DECISION,
    FlatTree,
    best_response_value,
    build_tree,
    expected_values,
    infoset_key,
    reach_probabilities,
)
from .policy import PolicyTable


class BaselineError(ValueError):
    pass


def regret_matching(regrets, legal_count: int | None = None):
    """Positive-part normalization; uniform when nothing is positive."""
    regrets = list(regrets)
    n = legal_count if legal_count is not None else len(regrets)
    positive = [max(r, 0.0) for r in regrets[:n]]
    total = sum(positive)
    if total > 0:
        return [p / total for p in positive]
    return [1.0 / n] * n


def _regret_matching_matrix(regrets: np.ndarray, mask: np.ndarray) -> np.ndarray:
    positive = np.maximum(regrets, 0.0) * mask
    totals = positive.sum(axis=1, keepdims=True)
    counts = mask.sum(axis=1, keepdims=True)
    uniform = mask / counts
    with np.errstate(invalid="ignore"):
        sigma = np.where(totals > 0, positive / np.where(totals > 0, totals, 1.0), uniform)
    return sigma


@dataclass
class CFRPolicy:
    """Average strategy plus the raw accumulators it came from."""

    iterations: int
    strategy: dict[str, dict[str, float]]  # infoset key -> action -> prob
    actions: dict[str, tuple[str, ...]]
    regrets: dict[str, list[float]] = field(default_factory=dict)
    small_blind: int = 0
    round2_first_actor: str = "small_blind"

    def action_distribution(self, key: str) -> dict[str, float]:
        if key not in self.strategy:
            raise BaselineError(f"info set {key!r} not covered by this policy")
        return self.strategy[key]

    def to_json_dict(self) -> dict:
        return {
            "cfr_version": 1,
            "iterations": self.iterations,
            "small_blind": self.small_blind,
            "round2_first_actor": self.round2_first_actor,
            "infosets": {
                key: {
                    "actions": list(self.actions[key]),
                    "avg": [self.strategy[key][a] for a in self.actions[key]],
                }
                for key in sorted(self.strategy)
            },
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CFRPolicy":
        if d.get("cfr_version") != 1:
            raise BaselineError(f"unsupported cfr_version {d.get('cfr_version')!r}")
        strategy = {}
        actions = {}
        for key, entry in d["infosets"].items():
            acts = tuple(entry["actions"])
            actions[key] = acts
            strategy[key] = dict(zip(acts, entry["avg"]))
        return cls(
            iterations=d["iterations"],
            strategy=strategy,
            actions=actions,
            small_blind=d.get("small_blind", 0),
            round2_first_actor=d.get("round2_first_actor", "small_blind"),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True, indent=1))

    @classmethod
    def load(cls, path) -> "CFRPolicy":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def _average_strategy(tree: FlatTree, strat_sum: np.ndarray, mask: np.ndarray) -> np.ndarray:
    totals = strat_sum.sum(axis=1, keepdims=True)
    counts = mask.sum(axis=1, keepdims=True)
    uniform = mask / counts
    return np.where(totals > 0, strat_sum / np.where(totals > 0, totals, 1.0), uniform)


def _to_policy(tree: FlatTree, avg: np.ndarray, regrets: np.ndarray, iterations: int) -> CFRPolicy:
    strategy = {}
    actions = {}
    raw = {}
    for i, key in enumerate(tree.iset_keys):
        acts = tree.iset_actions[i]
        actions[key] = acts
        strategy[key] = {a: float(avg[i, slot]) for slot, a in enumerate(acts)}
        raw[key] = [float(regrets[i, slot]) for slot in range(len(acts))]
    return CFRPolicy(
        iterations=iterations,
        strategy=strategy,
        actions=actions,
        regrets=raw,
        small_blind=tree.small_blind,
        round2_first_actor=tree.round2_first_actor,
    )


def cfr_train(
    iterations: int,
    seed: int = 0,
    small_blind: int = 0,
    round2_first_actor: str = "small_blind",
    checkpoints=(),
    on_checkpoint=None,
) -> CFRPolicy:
    """Vanilla CFR: one full-tree traversal per iteration, alternating the
    updating player. Deterministic; the seed only labels the run."""
    if iterations < 1:
        raise BaselineError("iterations must be >= 1")
    tree = build_tree(small_blind=small_blind, round2_first_actor=round2_first_actor)
    mask = tree.action_mask()
    n_isets, n_actions = mask.shape
    regrets = np.zeros((n_isets, n_actions))
    strat_sum = np.zeros_like(regrets)
    decision_edges = tree.kind[tree.e_parent] == DECISION
    edge_data = {}
    for p in (0, 1):
        edges = np.where(decision_edges & (tree.player[tree.e_parent] == p))[0]
        par = tree.e_parent[edges]
        flat = tree.iset[par].astype(np.int64) * n_actions + tree.e_slot[edges]
        edge_data[p] = (par, tree.e_child[edges], flat)
    node_data = {}
    for p in (0, 1):
        nodes = np.where((tree.kind == DECISION) & (tree.player == p))[0]
        node_data[p] = (nodes, tree.iset[nodes].astype(np.int64))
    checkpoints = set(checkpoints)
    for t in range(iterations):
        traverser = t % 2
        sigma = _regret_matching_matrix(regrets, mask)
        reach_me, reach_opp = reach_probabilities(tree, sigma, traverser)
        value = expected_values(tree, sigma, traverser)
        par, child, flat = edge_data[traverser]
        regrets += np.bincount(
            flat,
            weights=reach_opp[par] * (value[child] - value[par]),
            minlength=n_isets * n_actions,
        ).reshape(n_isets, n_actions)
        nodes, node_isets = node_data[traverser]
        reach_per_iset = np.bincount(node_isets, weights=reach_me[nodes], minlength=n_isets)
        strat_sum += reach_per_iset[:, None] * sigma
        done = t + 1
        if done in checkpoints and on_checkpoint is not None:
            avg = _average_strategy(tree, strat_sum, mask)
            on_checkpoint(done, _to_policy(tree, avg, regrets, done))
    avg = _average_strategy(tree, strat_sum, mask)
    return _to_policy(tree, avg, regrets, iterations)


def _sigma_matrix(tree: FlatTree, policy: CFRPolicy) -> np.ndarray:
    sigma = np.zeros((tree.n_infosets, tree.max_actions))
    for i, key in enumerate(tree.iset_keys):
        if key not in policy.strategy:
            raise BaselineError(f"info set {key!r} not covered by this policy")
        row = policy.strategy[key]
        for slot, action in enumerate(tree.iset_actions[i]):
            sigma[i, slot] = row.get(action, 0.0)
    return sigma


def exploitability(policy: CFRPolicy) -> float:
    """Mean of both best-response values against the policy, in chips/hand."""
    tree = build_tree(
        small_blind=policy.small_blind, round2_first_actor=policy.round2_first_actor
    )
    sigma = _sigma_matrix(tree, policy)
    br0 = best_response_value(tree, sigma, 0)
    br1 = best_response_value(tree, sigma, 1)
    return (br0 + br1) / 2.0


def uniform_policy(small_blind: int = 0, round2_first_actor: str = "small_blind") -> CFRPolicy:
    tree = build_tree(small_blind=small_blind, round2_first_actor=round2_first_actor)
    strategy = {}
    actions = {}
    for i, key in enumerate(tree.iset_keys):
        acts = tree.iset_actions[i]
        actions[key] = acts
        strategy[key] = {a: 1.0 / len(acts) for a in acts}
    return CFRPolicy(
        iterations=0,
        strategy=strategy,
        actions=actions,
        small_blind=small_blind,
        round2_first_actor=round2_first_actor,
    )


class SimpleAgent:
    """Protocol shared by every harness player; hooks default to no-ops."""

    def begin_game(self, game_index, seat, small_blind, round2_first_actor="small_blind"):
        pass

    def observe_step(self, player, action, round_name):
        pass

    def act(self, obs: RawObservation) -> str:
        raise NotImplementedError

    def end_game(self, record):
        pass


class RandomAgent(SimpleAgent):
    def __init__(self, rng: random.Random | None = None):
        self.rng = rng or random.Random()

    def act(self, obs: RawObservation) -> str:
        return self.rng.choice(list(obs.legal_actions))


DEFAULT_RULE_TABLE = {
    # raise with K, call with Q, fold to a bet with J
    "K": ("raise", "call", "check"),
    "Q": ("call", "check", "fold"),
    "J": ("check", "fold"),
}


class RuleAgent(SimpleAgent):
    """Deterministic table: first legal action in the rank's preference list."""

    def __init__(self, table: dict | None = None):
        self.table = table or DEFAULT_RULE_TABLE

    def act(self, obs: RawObservation) -> str:
        for action in self.table[rank_of(obs.hand)]:
            if action in obs.legal_actions:
                return action
        return obs.legal_actions[0]


class TableAgent(SimpleAgent):
    """Samples from a fixed policy table restricted to the legal actions."""

    def __init__(self, table: PolicyTable, rng: random.Random | None = None):
        self.table = table
        self.rng = rng or random.Random()

    def act(self, obs: RawObservation) -> str:
        dist = self.table.response_distribution(
            rank_of(obs.hand), obs.round_name, obs.legal_actions
        )
        actions = list(dist)
        draw = self.rng.random()
        acc = 0.0
        for action in actions:
            acc += dist[action]
            if draw <= acc:
                return action
        return actions[-1]


class CFRAgent(SimpleAgent):
    """Plays the average strategy; tracks the betting history for keys."""

    def __init__(self, policy: CFRPolicy, rng: random.Random | None = None, greedy: bool = False):
        self.policy = policy
        self.rng = rng or random.Random()
        self.greedy = greedy
        self._r1 = ""
        self._r2: str | None = None

    def begin_game(self, game_index, seat, small_blind, round2_first_actor="small_blind"):
        self._r1 = ""
        self._r2 = None

    def observe_step(self, player, action, round_name):
        letter = {"raise": "r", "call": "c", "check": "k", "fold": "f"}[action]
        if round_name == PREREVEAL:
            self._r1 += letter
        else:
            self._r2 = (self._r2 or "") + letter

    def act(self, obs: RawObservation) -> str:
        public_rank = rank_of(obs.public_card) if obs.public_card else None
        r2 = self._r2 if public_rank is not None else None
        if public_rank is not None and r2 is None:
            r2 = ""
        key = infoset_key(rank_of(obs.hand), public_rank, self._r1, r2)
        dist = self.policy.action_distribution(key)
        legal = [a for a in obs.legal_actions if dist.get(a, 0.0) > 0] or list(obs.legal_actions)
        if self.greedy:
            return max(legal, key=lambda a: (dist.get(a, 0.0), -ACTIONS.index(a)))
        weights = [dist.get(a, 0.0) for a in legal]
        total = sum(weights)
        if total <= 0:
            return self.rng.choice(legal)
        draw = self.rng.random() * total
        acc = 0.0
        for action, w in zip(legal, weights):
            acc += w
            if draw <= acc:
                return action
        return legal[-1]
