"""Conditional action-probability tables and the detect/evaluate/revise loop.

A policy table maps (card rank, betting round) to a distribution over the
four actions. Two tables are maintained per agent: the opponent's inferred
"environmental" pattern and the agent's own "self" pattern. Calibration runs
in three steps after games complete:

1. detect   - smoothed action frequencies per rank from revealed history,
2. diverge  - total-variation check of the old table against detection,
3. evaluate_joint / revise - blend old and detected conditionals, weight by
   the empirical rank frequencies, and divide the weights back out.

The self pattern is revised the same way and then shifted toward the best
response against the freshly revised environmental pattern.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

from .engine import ACTIONS, CALL, CHECK, FOLD, PREREVEAL, POSTREVEAL, RAISE, RANKS, ROUNDS

logger = logging.getLogger(__name__)

ROW_TOL = 1e-9

CHARACTERS = ("aggressive", "conservative", "neutral", "flexible")


class PolicyError(ValueError):
    """Invalid table construction or incompatible table pair."""


def _normalize(weights: dict[str, float]) -> dict[str, float]:
    total = sum(weights.values())
    if total <= 0:
        raise PolicyError("cannot normalize an all-zero row")
    return {a: w / total for a, w in weights.items()}


@dataclass(frozen=True)
class PolicyTable:
    """Row-stochastic table of P(action | rank, round)."""

    rows: dict[tuple[str, str], dict[str, float]]
    support: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: {ctx: ACTIONS for ctx in ROUNDS}
    )
    low_confidence: frozenset = frozenset()

    def __post_init__(self):
        for key, row in self.rows.items():
            ctx = key[1]
            mask = set(self.support[ctx])
            total = 0.0
            for action in ACTIONS:
                p = row.get(action, 0.0)
                if p < -ROW_TOL:
                    raise PolicyError(f"negative probability in row {key}")
                if action not in mask and p > ROW_TOL:
                    raise PolicyError(f"probability outside support in row {key}")
                total += p
            if abs(total - 1.0) > ROW_TOL:
                raise PolicyError(f"row {key} sums to {total}, expected 1")

    @classmethod
    def uniform(cls, support: dict[str, tuple[str, ...]] | None = None) -> "PolicyTable":
        support = support or {ctx: ACTIONS for ctx in ROUNDS}
        rows = {}
        for ctx in ROUNDS:
            legal = support[ctx]
            for rank in RANKS:
                rows[(rank, ctx)] = {
                    a: (1.0 / len(legal) if a in legal else 0.0) for a in ACTIONS
                }
        return cls(rows=rows, support=support)

    def prob(self, rank: str, ctx: str, action: str) -> float:
        return self.rows[(rank, ctx)].get(action, 0.0)

    def row(self, rank: str, ctx: str) -> dict[str, float]:
        return dict(self.rows[(rank, ctx)])

    def response_distribution(self, rank: str, ctx: str, legal) -> dict[str, float]:
        """Row restricted to a legal set and renormalized; uniform when the
        row puts no mass on any legal action."""
        row = self.rows[(rank, ctx)]
        restricted = {a: row.get(a, 0.0) for a in legal}
        total = sum(restricted.values())
        if total <= 0:
            return {a: 1.0 / len(legal) for a in legal}
        return {a: p / total for a, p in restricted.items()}

    def to_json_dict(self) -> dict:
        return {
            "policy_version": 1,
            "contexts": {
                ctx: {
                    rank: {a: self.rows[(rank, ctx)].get(a, 0.0) for a in ACTIONS}
                    for rank in RANKS
                }
                for ctx in ROUNDS
            },
            "support": {ctx: list(self.support[ctx]) for ctx in ROUNDS},
            "low_confidence": sorted(f"{rank}:{ctx}" for rank, ctx in self.low_confidence),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PolicyTable":
        if d.get("policy_version") != 1:
            raise PolicyError(f"unsupported policy_version {d.get('policy_version')!r}")
        rows = {}
        for ctx, by_rank in d["contexts"].items():
            for rank, row in by_rank.items():
                rows[(rank, ctx)] = {a: float(p) for a, p in row.items()}
        support = {ctx: tuple(acts) for ctx, acts in d["support"].items()}
        low = frozenset(
            (item.split(":")[0], item.split(":")[1]) for item in d.get("low_confidence", [])
        )
        return cls(rows=rows, support=support, low_confidence=low)


@dataclass(frozen=True)
class PatternReport:
    """A policy table plus the coarse character label derived from it."""

    table: PolicyTable
    character: str
    rationale: str = ""

    @classmethod
    def from_table(cls, table: PolicyTable, rationale: str = "") -> "PatternReport":
        return cls(table=table, character=classify_character(table), rationale=rationale)


@dataclass(frozen=True)
class DivergenceFinding:
    # cells: (rank, ctx, action, old prob, detected prob, tv contribution)
    cells: tuple
    row_tv: dict[tuple[str, str], float]
    triggered: bool
    threshold: float


@dataclass(frozen=True)
class JointPolicy:
    """P(action, rank) per round plus what is needed to invert it back."""

    weights: dict[tuple[str, str], float]  # P(rank | history) per (rank, ctx)
    entries: dict[tuple[str, str], dict[str, float]]  # joint rows, weight * conditional
    fallback: PolicyTable  # rows inherited for ranks with zero history mass
    support: dict[str, tuple[str, ...]]


def _digest_counts(digest, side: str) -> dict:
    if side == "opponent":
        return digest.opponent_counts
    if side == "own":
        return digest.own_counts
    raise PolicyError(f"unknown digest side {side!r}")


def detect(digest, smoothing: float = 1.0, side: str = "opponent") -> PolicyTable:
    """Smoothed empirical P(action | rank, round) from a history digest.

    Ranks never seen in the window fall back to uniform rows over the legal
    support and are flagged low-confidence.
    """
    counts = _digest_counts(digest, side)
    support = {ctx: ACTIONS for ctx in ROUNDS}
    rows = {}
    low = set()
    for ctx in ROUNDS:
        legal = support[ctx]
        for rank in RANKS:
            by_action = {a: counts.get((rank, ctx, a), 0) for a in legal}
            total = sum(by_action.values())
            if total == 0 and smoothing == 0:
                rows[(rank, ctx)] = {
                    a: (1.0 / len(legal) if a in legal else 0.0) for a in ACTIONS
                }
                low.add((rank, ctx))
                continue
            if total == 0:
                low.add((rank, ctx))
            denom = total + smoothing * len(legal)
            rows[(rank, ctx)] = {
                a: ((by_action[a] + smoothing) / denom if a in legal else 0.0)
                for a in ACTIONS
            }
    return PolicyTable(rows=rows, support=support, low_confidence=frozenset(low))


def rank_weights(digest, side: str = "opponent") -> dict[tuple[str, str], float]:
    """Empirical P(rank | history) per round context."""
    counts = _digest_counts(digest, side)
    weights = {}
    for ctx in ROUNDS:
        totals = {
            rank: sum(counts.get((rank, ctx, a), 0) for a in ACTIONS) for rank in RANKS
        }
        grand = sum(totals.values())
        for rank in RANKS:
            weights[(rank, ctx)] = (totals[rank] / grand) if grand > 0 else 0.0
    return weights


def row_total_variation(p: dict[str, float], q: dict[str, float]) -> float:
    return 0.5 * sum(abs(p.get(a, 0.0) - q.get(a, 0.0)) for a in ACTIONS)


def diverge(old: PolicyTable, detected: PolicyTable, threshold: float = 0.2) -> DivergenceFinding:
    """Per-row total-variation distance between the old table and detection.

    Rows the detection flagged low-confidence (no observations) are skipped:
    there is no evidence of inconsistency in them.
    """
    if old.support != detected.support:
        raise PolicyError("tables do not share a support mask")
    cells = []
    row_tv = {}
    for key in sorted(old.rows):
        if key in detected.low_confidence:
            continue
        rank, ctx = key
        old_row = old.rows[key]
        new_row = detected.rows[key]
        tv = row_total_variation(old_row, new_row)
        row_tv[key] = tv
        for action in ACTIONS:
            p_old = old_row.get(action, 0.0)
            p_new = new_row.get(action, 0.0)
            cells.append((rank, ctx, action, p_old, p_new, 0.5 * abs(p_new - p_old)))
    triggered = any(tv > threshold for tv in row_tv.values())
    return DivergenceFinding(
        cells=tuple(cells), row_tv=row_tv, triggered=triggered, threshold=threshold
    )


def evaluate_joint(
    old: PolicyTable,
    digest,
    reflections=(),
    backend=None,
    blend: float = 0.5,
    side: str = "opponent",
    smoothing: float = 1.0,
) -> JointPolicy:
    """Joint P(action, rank) built from the old table and fresh detection.

    The scripted computation forms, per round context,

        joint(a, c) = P(c | history) * ((1 - blend) * old(a|c) + blend * detected(a|c))

    An LLM backend, when provided, replaces the blended conditional with the
    distribution parsed from its pattern-revision answer; unparseable output
    falls back to the detected table.
    """
    detected = detect(digest, smoothing=smoothing, side=side)
    weights = rank_weights(digest, side=side)
    conditional = {}
    for key in old.rows:
        old_row = old.rows[key]
        det_row = detected.rows[key]
        conditional[key] = {
            a: (1.0 - blend) * old_row.get(a, 0.0) + blend * det_row.get(a, 0.0)
            for a in ACTIONS
        }
    if backend is not None:
        parsed = _backend_conditional(old, digest, reflections, backend, side)
        if parsed is None:
            logger.warning("pattern backend output unusable; falling back to detection")
            conditional = {key: dict(detected.rows[key]) for key in old.rows}
        else:
            conditional.update(parsed)
    entries = {
        key: {a: weights[key] * p for a, p in row.items()}
        for key, row in conditional.items()
    }
    return JointPolicy(weights=weights, entries=entries, fallback=old, support=dict(old.support))


def _backend_conditional(old, digest, reflections, backend, side):
    from .reasoners.base import ReasonerRequest

    kind = "pattern_env" if side == "opponent" else "pattern_self"
    request = ReasonerRequest.for_pattern(
        kind, old_table=old, digest=digest, reflections=reflections
    )
    response = backend.complete(request)
    rows = response.structured
    if not isinstance(rows, dict):
        return None
    parsed = {}
    for key, row in rows.items():
        if key in old.rows and isinstance(row, dict):
            parsed[key] = {a: float(row.get(a, 0.0)) for a in ACTIONS}
    return parsed or None


def revise(joint: JointPolicy, digest) -> PolicyTable:
    """Recover P(action | rank, round) by dividing out the rank weights.

    Ranks with zero history mass keep their rows from the table the joint
    was built on.
    """
    rows = {}
    low = set()
    for key, entry in joint.entries.items():
        w = joint.weights[key]
        if w <= 0:
            rows[key] = dict(joint.fallback.rows[key])
            low.add(key)
            continue
        rows[key] = _normalize({a: entry.get(a, 0.0) / w for a in ACTIONS})
    return PolicyTable(rows=rows, support=dict(joint.support), low_confidence=frozenset(low))


def classify_character(table: PolicyTable) -> str:
    """Coarse behavioural label for a table.

    Checked in order: aggressive (mean raise mass > 0.5), conservative
    (every rank keeps fold+check mass > 0.5), flexible (the three ranks
    have three different argmax actions), else neutral. Rows are averaged
    across round contexts first.
    """
    averaged = {}
    for rank in RANKS:
        averaged[rank] = {
            a: sum(table.prob(rank, ctx, a) for ctx in ROUNDS) / len(ROUNDS)
            for a in ACTIONS
        }
    raise_mass = sum(row[RAISE] for row in averaged.values()) / len(RANKS)
    if raise_mass > 0.5:
        return "aggressive"
    if all(row[FOLD] + row[CHECK] > 0.5 for row in averaged.values()):
        return "conservative"
    argmaxes = {
        max(ACTIONS, key=lambda a: (averaged[rank][a], -ACTIONS.index(a)))
        for rank in RANKS
    }
    if len(argmaxes) == len(RANKS):
        return "flexible"
    return "neutral"


def evolve_self(
    env_pattern: PatternReport,
    old_self: PatternReport,
    digest,
    reflections=(),
    backend=None,
    blend: float = 0.5,
    smoothing: float = 1.0,
    best_response_shift: bool = True,
) -> PatternReport:
    """Revise the self pattern against a freshly revised environmental one.

    The self table goes through the same joint/revise blend on the agent's
    own action history; with reflections available, each rank's row is then
    shifted by ``blend`` toward the action with the highest lookahead value
    against the new environmental pattern.
    """
    joint = evaluate_joint(
        old_self.table,
        digest,
        reflections=reflections,
        backend=backend,
        blend=blend,
        side="own",
        smoothing=smoothing,
    )
    table = revise(joint, digest)
    if best_response_shift:
        table = _shift_to_best_response(table, env_pattern, blend)
    rationale = (
        f"self pattern recalibrated (blend={blend}, "
        f"best_response={'on' if best_response_shift else 'off'})"
    )
    return PatternReport.from_table(table, rationale=rationale)


def _shift_to_best_response(table: PolicyTable, env_pattern: PatternReport, blend: float) -> PolicyTable:
    # Imported here because the plan engine consumes the table types above.
    from .plans import best_response_action

    rows = {}
    for (rank, ctx), row in table.rows.items():
        best = best_response_action(rank, ctx, env_pattern)
        rows[(rank, ctx)] = _normalize(
            {
                a: (1.0 - blend) * row.get(a, 0.0) + (blend if a == best else 0.0)
                for a in ACTIONS
            }
        )
    return PolicyTable(rows=rows, support=dict(table.support), low_confidence=table.low_confidence)
