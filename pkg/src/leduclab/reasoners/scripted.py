"""Deterministic reasoner: answers every request kind numerically.

Each handler calls the matching numeric operation and renders a text in the
shape the corresponding prompt asks for, so scripted runs produce the same
artifacts as model-backed ones, byte-for-byte reproducibly.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..engine import ACTIONS, RANK_NAMES, RANKS, ROUNDS
from ..policy import PatternReport, PolicyTable, classify_character, detect
from .base import BackendError, Reasoner, ReasonerRequest, ReasonerResponse
from .prompts import DEFAULT_RECIPIENT_NAME, interpret_text

CHARACTER_WORDS = {
    "aggressive": "radically",
    "conservative": "conservatively",
    "neutral": "neutrally",
    "flexible": "flexibly",
}


def table_to_text(table_or_report, owner: str = DEFAULT_RECIPIENT_NAME) -> str:
    """Tree-structure rendering of a policy table, one line per round."""
    if isinstance(table_or_report, PatternReport):
        table = table_or_report.table
        character = table_or_report.character
    else:
        table = table_or_report
        character = classify_character(table)
    lines = []
    for ctx in ROUNDS:
        label = "public card not released" if ctx == "prereveal" else "public card released"
        parts = []
        for rank in RANKS:
            row = table.rows[(rank, ctx)]
            probs = ", ".join(
                f"{a} ({row.get(a, 0.0) * 100:.0f}%)" for a in ACTIONS if row.get(a, 0.0) > 0
            )
            parts.append(f"when {owner} holds {rank}, he would like to do {probs}")
        lines.append(f"In the rounds with {label}: " + "; ".join(parts) + ".")
    lines.append(
        f"To my konwledge, {owner} tends to act {CHARACTER_WORDS[character]}."
    )
    return "\n".join(lines)


def digest_to_text(digest) -> str:
    if digest.decision_steps == 0:
        return "No completed games in memory yet."
    opp = ", ".join(
        f"{rank}/{ctx}/{action}: {count}"
        for (rank, ctx, action), count in sorted(digest.opponent_counts.items())
    )
    own = ", ".join(
        f"{rank}/{ctx}/{action}: {count}"
        for (rank, ctx, action), count in sorted(digest.own_counts.items())
    )
    chips = digest.chip_trajectory[-1] if digest.chip_trajectory else 0
    return (
        f"Games {digest.window[0]}..{digest.window[1]}: opponent action counts by "
        f"revealed card [{opp}]; own action counts [{own}]; running chips {chips:+d}."
    )


def reflections_to_text(reflections) -> str:
    if not reflections:
        return "No reflection notes yet."
    lines = []
    for note in reflections:
        for v in note.verdicts:
            lines.append(
                f"game {note.game_index} step {v.step_index}: {v.action} was {v.label}"
                + (f" (worth {v.counterfactual:+.2f} chips)" if v.label == "wrong" else "")
            )
        for m in note.opponent_motivation:
            lines.append(f"game {note.game_index} step {m['step_index']}: opponent {m['note']}")
    return "\n".join(lines)


def belief_to_text(report, owner: str = DEFAULT_RECIPIENT_NAME) -> str:
    probs = ", ".join(
        f"card {rank} ({report.posterior[rank] * 100:.0f}%)" for rank in RANKS
    )
    steps = "; ".join(
        f"did {e['action']} ({e['round']})" for e in report.evidence
    ) or "has not acted yet"
    return (
        f"{owner} {steps}; because of {owner}'s behaviour pattern, {owner} tends to "
        f"have {probs} (normalize to number 100%). Best combination: {report.best_combination}."
    )


def self_belief_to_text(belief) -> str:
    return (
        f"Advantages: {belief.advantages}. Disadvantages: {belief.disadvantages}. "
        f"Right now I win {belief.win_now * 100:.0f}%, lose {belief.lose_now * 100:.0f}%, "
        f"draw {belief.draw_now * 100:.0f}%. Goal: {belief.long_term_note}."
    )


def plans_to_text(choice) -> str:
    lines = []
    for i, plan in enumerate(choice.ranked, start=1):
        per_card = "; ".join(
            f"when he holds {b.rank} ({b.weight * 100:.0f}%) I win {b.win_rate * 100:.0f}%"
            for b in plan.breakdown
        )
        lines.append(
            f"Plan {i}: if I {plan.action}, win {plan.win_rate * 100:.1f}%, "
            f"lose {plan.lose_rate * 100:.1f}%, draw {plan.draw_rate * 100:.1f}%; "
            f"win payoff {plan.win_payoff:.2f}, lose payoff {plan.lose_payoff:.2f}; "
            f"expected chips gain {plan.expected_gain:+.3f}. ({per_card})"
        )
    lines.append(f"Best plan: {choice.best.action}, because {choice.rationale}.")
    return "\n".join(lines)


@dataclass
class ScriptedReasoner(Reasoner):
    """Pure-function backend; identical requests produce identical responses."""

    blend: float = 0.5
    smoothing: float = 1.0

    def complete(self, request: ReasonerRequest) -> ReasonerResponse:
        handler = getattr(self, f"_{request.kind}", None)
        if handler is None:
            raise BackendError(f"no scripted handler for {request.kind!r}")
        text, structured = handler(request.context)
        return ReasonerResponse(text=text, structured=structured, provenance="scripted")

    def _interpret(self, ctx):
        text = interpret_text(ctx["obs"])
        return text, text

    def _pattern_rows(self, ctx, side):
        old = ctx["old_table"]
        if isinstance(old, PatternReport):
            old = old.table
        digest = ctx["digest"]
        blend = ctx.get("blend", self.blend)
        detected = detect(digest, smoothing=ctx.get("smoothing", self.smoothing), side=side)
        rows = {}
        for key in old.rows:
            rows[key] = {
                a: (1.0 - blend) * old.rows[key].get(a, 0.0)
                + blend * detected.rows[key].get(a, 0.0)
                for a in ACTIONS
            }
        return rows

    def _pattern_env(self, ctx):
        rows = self._pattern_rows(ctx, side="opponent")
        table = PolicyTable(rows=rows)
        return table_to_text(table), rows

    def _pattern_self(self, ctx):
        rows = self._pattern_rows(ctx, side="own")
        table = PolicyTable(rows=rows)
        return table_to_text(table, owner="I"), rows

    def _belief_env(self, ctx):
        from ..beliefs import environmental_belief

        report = environmental_belief(ctx["obs"], ctx["opp_actions"], ctx["pattern_env"])
        text = belief_to_text(report)
        if ctx.get("pattern_self") is not None and ctx.get("my_actions"):
            # The opponent's likely read of my own card: the same inference
            # with the roles swapped, my actions judged against my pattern.
            mirrored = environmental_belief(
                ctx["obs"], ctx["my_actions"], ctx["pattern_self"]
            )
            guess = ", ".join(
                f"{rank} ({mirrored.posterior[rank] * 100:.0f}%)" for rank in RANKS
            )
            text += f" Potential belief about my cards: {guess}."
        return text, report

    def _belief_self(self, ctx):
        from ..beliefs import self_belief

        belief = self_belief(ctx["obs"], ctx["pattern_self"], ctx["env_belief"])
        return self_belief_to_text(belief), belief

    def _plan(self, ctx):
        from ..plans import enumerate_plans, select_best

        plans = enumerate_plans(
            ctx["point"],
            ctx["belief"],
            ctx["pattern_env"],
            self_policy=ctx.get("self_policy"),
            lookahead=ctx.get("lookahead", "max"),
        )
        choice = select_best(plans, style=ctx.get("style", "neutral"))
        return plans_to_text(choice), choice

    def _reflect(self, ctx):
        from ..memory import reflect

        note = reflect(ctx["record"], backend=None, perspective=ctx.get("perspective", 0))
        text = reflections_to_text([note])
        return text, note
