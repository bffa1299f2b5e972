"""Flattened full game tree for regret minimization and best response.

The tree is built once per rules configuration by driving the engine over
every ordered private deal, inserting an explicit chance node over the four
possible public cards where the first betting round closes. Decision nodes
carry an information-set id keyed by (own rank, public rank, betting history
string), the projection visible to the acting player; terminal nodes carry
the engine-settled payoff for seat 0.

Node/edge data is flattened into numpy arrays grouped by depth so a full
counterfactual-regret sweep is a handful of vector operations per level.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .engine import (
    DECK,
    POSTREVEAL,
    PREREVEAL,
    apply_action,
    deal,
    legal_actions,
    rank_of,
    settle,
)

DECISION, CHANCE, TERMINAL = 0, 1, 2

ACTION_LETTER = {"raise": "r", "call": "c", "check": "k", "fold": "f"}


def infoset_key(own_rank: str, public_rank: str | None, r1: str, r2: str | None) -> str:
    if public_rank is None:
        return f"{own_rank}::{r1}"
    return f"{own_rank}:{public_rank}:{r1}/{r2}"


@dataclass
class _Level:
    """Static per-depth edge slices, precomputed once for the sweeps."""

    par: np.ndarray
    ch: np.ndarray
    slot: np.ndarray
    prob: np.ndarray
    is_dec: np.ndarray
    is_chance: np.ndarray
    par_player: np.ndarray
    par_iset: np.ndarray


@dataclass
class FlatTree:
    kind: np.ndarray
    player: np.ndarray
    iset: np.ndarray
    depth: np.ndarray
    util0: np.ndarray
    e_parent: np.ndarray
    e_child: np.ndarray
    e_slot: np.ndarray
    e_prob: np.ndarray
    levels: list  # _Level slices ordered by parent depth
    iset_keys: list[str]
    iset_actions: list[tuple[str, ...]]
    iset_player: np.ndarray
    max_actions: int
    root: int
    small_blind: int
    round2_first_actor: str

    @property
    def n_nodes(self) -> int:
        return len(self.kind)

    @property
    def n_infosets(self) -> int:
        return len(self.iset_keys)

    def action_mask(self) -> np.ndarray:
        mask = np.zeros((self.n_infosets, self.max_actions), dtype=bool)
        for i, actions in enumerate(self.iset_actions):
            mask[i, : len(actions)] = True
        return mask


class _Builder:
    def __init__(self, small_blind: int, round2_first_actor: str):
        self.small_blind = small_blind
        self.round2_first_actor = round2_first_actor
        self.nodes = []  # (kind, player, iset, depth, util0)
        self.edges = []  # (parent, child, slot, prob)
        self.iset_ids: dict[str, int] = {}
        self.iset_actions: list[tuple[str, ...]] = []
        self.iset_player: list[int] = []

    def _add_node(self, kind, player, iset, depth, util0=0.0) -> int:
        self.nodes.append((kind, player, iset, depth, util0))
        return len(self.nodes) - 1

    def _iset_id(self, key: str, actions: tuple[str, ...], player: int) -> int:
        if key in self.iset_ids:
            return self.iset_ids[key]
        self.iset_ids[key] = len(self.iset_actions)
        self.iset_actions.append(actions)
        self.iset_player.append(player)
        return self.iset_ids[key]

    def build(self) -> FlatTree:
        root = self._add_node(CHANCE, -1, -1, 0)
        pairs = [(c0, c1) for c0 in DECK for c1 in DECK if c0 != c1]
        for c0, c1 in pairs:
            placeholder = next(c for c in DECK if c not in (c0, c1))
            state = deal(
                (c0, c1),
                placeholder,
                small_blind_player=self.small_blind,
                round2_first_actor=self.round2_first_actor,
            )
            child = self._expand(state, depth=1, r1="", r2=None)
            self.edges.append((root, child, 0, 1.0 / len(pairs)))
        return self._flatten(root)

    def _expand(self, state, depth: int, r1: str, r2: str | None) -> int:
        if state.terminal:
            return self._add_node(
                TERMINAL, -1, -1, depth, util0=float(settle(state).net_chips[0])
            )
        player = state.to_act
        own_rank = rank_of(state.private_cards[player])
        public_rank = rank_of(state.public_card) if state.public_card else None
        key = infoset_key(own_rank, public_rank, r1, r2)
        actions = tuple(legal_actions(state))
        iset = self._iset_id(key, actions, player)
        node = self._add_node(DECISION, player, iset, depth)
        for slot, action in enumerate(actions):
            nxt = apply_action(state, action)
            letter = ACTION_LETTER[action]
            if state.round_name == PREREVEAL and nxt.round_name == POSTREVEAL:
                # Round one just closed on a placeholder card: branch the
                # reveal explicitly over the four undealt cards.
                chance = self._add_node(CHANCE, -1, -1, depth + 1)
                self.edges.append((node, chance, slot, 1.0))
                remaining = [c for c in DECK if c not in state.private_cards]
                for pub in remaining:
                    branch = replace(nxt, pending_public=pub, public_card=pub)
                    child = self._expand(branch, depth + 2, r1 + letter, "")
                    self.edges.append((chance, child, 0, 1.0 / len(remaining)))
            elif state.round_name == PREREVEAL:
                child = self._expand(nxt, depth + 1, r1 + letter, None)
                self.edges.append((node, child, slot, 1.0))
            else:
                child = self._expand(nxt, depth + 1, r1, (r2 or "") + letter)
                self.edges.append((node, child, slot, 1.0))
        return node

    def _flatten(self, root: int) -> FlatTree:
        n = len(self.nodes)
        kind = np.array([x[0] for x in self.nodes], dtype=np.int8)
        player = np.array([x[1] for x in self.nodes], dtype=np.int8)
        iset = np.array([x[2] for x in self.nodes], dtype=np.int32)
        depth = np.array([x[3] for x in self.nodes], dtype=np.int16)
        util0 = np.array([x[4] for x in self.nodes], dtype=np.float64)
        e_parent = np.array([e[0] for e in self.edges], dtype=np.int32)
        e_child = np.array([e[1] for e in self.edges], dtype=np.int32)
        e_slot = np.array([e[2] for e in self.edges], dtype=np.int8)
        e_prob = np.array([e[3] for e in self.edges], dtype=np.float64)
        order = np.argsort(depth[e_parent], kind="stable")
        e_parent, e_child, e_slot, e_prob = (
            e_parent[order], e_child[order], e_slot[order], e_prob[order],
        )
        levels = []
        parent_depths = depth[e_parent]
        for d in range(parent_depths.max() + 1):
            idx = np.where(parent_depths == d)[0]
            if not len(idx):
                continue
            par = e_parent[idx]
            levels.append(
                _Level(
                    par=par,
                    ch=e_child[idx],
                    slot=e_slot[idx].astype(np.int64),
                    prob=e_prob[idx],
                    is_dec=(kind[par] == DECISION),
                    is_chance=(kind[par] == CHANCE),
                    par_player=player[par],
                    par_iset=iset[par].astype(np.int64),
                )
            )
        iset_keys = [""] * len(self.iset_ids)
        for key, i in self.iset_ids.items():
            iset_keys[i] = key
        assert n == len(kind)
        return FlatTree(
            kind=kind,
            player=player,
            iset=iset,
            depth=depth,
            util0=util0,
            e_parent=e_parent,
            e_child=e_child,
            e_slot=e_slot,
            e_prob=e_prob,
            levels=levels,
            iset_keys=iset_keys,
            iset_actions=self.iset_actions,
            iset_player=np.array(self.iset_player, dtype=np.int8),
            max_actions=max(len(a) for a in self.iset_actions),
            root=root,
            small_blind=self.small_blind,
            round2_first_actor=self.round2_first_actor,
        )


@lru_cache(maxsize=8)
def build_tree(small_blind: int = 0, round2_first_actor: str = "small_blind") -> FlatTree:
    return _Builder(small_blind, round2_first_actor).build()


def reach_probabilities(tree: FlatTree, sigma: np.ndarray, viewpoint: int):
    """(own reach, opponent-and-chance reach) per node under strategy sigma."""
    reach_me = np.ones(tree.n_nodes)
    reach_opp = np.ones(tree.n_nodes)
    for lv in tree.levels:
        w_sigma = np.where(lv.is_dec, sigma[lv.par_iset, lv.slot], 1.0)
        mine = lv.is_dec & (lv.par_player == viewpoint)
        w_me = np.where(mine, w_sigma, 1.0)
        w_opp = np.where(lv.is_dec & ~mine, w_sigma, np.where(lv.is_chance, lv.prob, 1.0))
        reach_me[lv.ch] = reach_me[lv.par] * w_me
        reach_opp[lv.ch] = reach_opp[lv.par] * w_opp
    return reach_me, reach_opp


def expected_values(tree: FlatTree, sigma: np.ndarray, viewpoint: int) -> np.ndarray:
    """Node values for ``viewpoint`` when both players follow sigma."""
    value = np.zeros(tree.n_nodes)
    sign = 1.0 if viewpoint == 0 else -1.0
    terminal = tree.kind == TERMINAL
    value[terminal] = sign * tree.util0[terminal]
    n = tree.n_nodes
    for lv in reversed(tree.levels):
        w = np.where(lv.is_dec, sigma[lv.par_iset, lv.slot], lv.prob)
        value += np.bincount(lv.par, weights=w * value[lv.ch], minlength=n)
    return value


def best_response_value(tree: FlatTree, sigma: np.ndarray, br_player: int) -> float:
    """Exact best-response value for ``br_player`` against sigma."""
    reach = np.ones(tree.n_nodes)  # opponent-and-chance reach only
    for lv in tree.levels:
        opp = lv.is_dec & (lv.par_player != br_player)
        w = np.where(opp, sigma[lv.par_iset, lv.slot], 1.0)
        w = np.where(lv.is_chance, lv.prob, w)
        reach[lv.ch] = reach[lv.par] * w
    value = np.zeros(tree.n_nodes)
    sign = 1.0 if br_player == 0 else -1.0
    terminal = tree.kind == TERMINAL
    value[terminal] = sign * tree.util0[terminal]
    neg_inf = np.finfo(np.float64).min
    n = tree.n_nodes
    for lv in reversed(tree.levels):
        br_mask = lv.is_dec & (lv.par_player == br_player)
        w = np.where(lv.is_dec, sigma[lv.par_iset, lv.slot], lv.prob)
        contrib = np.where(br_mask, 0.0, w * value[lv.ch])
        value += np.bincount(lv.par, weights=contrib, minlength=n)
        if br_mask.any():
            isets = lv.par_iset[br_mask]
            slots = lv.slot[br_mask]
            q = np.zeros((tree.n_infosets, tree.max_actions))
            np.add.at(q, (isets, slots), reach[lv.par[br_mask]] * value[lv.ch[br_mask]])
            achievable = np.full((tree.n_infosets, tree.max_actions), neg_inf)
            achievable[isets, slots] = q[isets, slots]
            best_slot = achievable.argmax(axis=1)
            chosen = br_mask & (lv.slot == best_slot[lv.par_iset])
            value[lv.par[chosen]] = value[lv.ch[chosen]]
    return float(value[tree.root])
