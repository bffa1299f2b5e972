"""Structured extraction from free-text reasoner answers.

The prompts ask for "label (probability)" spans normalized to 100%, so the
extractors look for a label word followed by a parenthesized number, accept
both percentage and decimal forms, map synonyms onto the canonical labels,
and renormalize over whatever mass was actually stated. Labels the text
never mentions get zero and the result is flagged partial.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..engine import ACTIONS
from .base import ParseError

ACTION_SYNONYMS = {
    "raise": "raise",
    "raising": "raise",
    "bet": "raise",
    "call": "call",
    "calling": "call",
    "check": "check",
    "checking": "check",
    "fold": "fold",
    "folding": "fold",
}

RANK_SYNONYMS = {
    "j": "J",
    "jack": "J",
    "q": "Q",
    "queen": "Q",
    "k": "K",
    "king": "K",
}

_NUM = r"(\d+(?:\.\d+)?)\s*(%)?"


@dataclass(frozen=True)
class ParsedDistribution:
    values: dict[str, float]
    matched: tuple[str, ...]
    unmatched: tuple[str, ...]
    partial: bool


def _synonyms_for(label: str) -> list[str]:
    names = [label.lower()]
    for syn, canonical in ACTION_SYNONYMS.items():
        if canonical.lower() == label.lower() and syn not in names:
            names.append(syn)
    for syn, canonical in RANK_SYNONYMS.items():
        if canonical.lower() == label.lower() and syn not in names:
            names.append(syn)
    return names


def _find_value(text: str, label: str) -> float | None:
    for name in _synonyms_for(label):
        # "label (70%)", "label(0.7)", "label: 70%", "label 70%"
        pattern = rf"\b{re.escape(name)}\b[\s:]*\(?\s*{_NUM}\s*\)?"
        m = re.search(pattern, text, flags=re.IGNORECASE)
        if m:
            value = float(m.group(1))
            if m.group(2) == "%" or value > 1.0:
                value /= 100.0
            return value
    return None


def extract_distribution(text: str, labels) -> ParsedDistribution:
    """Distribution over the expected labels, renormalized over the mass the
    text actually stated. Raises ParseError when no label matches."""
    values = {}
    matched = []
    unmatched = []
    for label in labels:
        value = _find_value(text, label)
        if value is None:
            unmatched.append(label)
            values[label] = 0.0
        else:
            matched.append(label)
            values[label] = value
    total = sum(values.values())
    if not matched or total <= 0:
        raise ParseError(f"no '{'/'.join(labels)}' probabilities found in text")
    values = {label: v / total for label, v in values.items()}
    return ParsedDistribution(
        values=values,
        matched=tuple(matched),
        unmatched=tuple(unmatched),
        partial=bool(unmatched),
    )


def extract_pattern_rows(text: str, contexts) -> dict:
    """Per-(rank, context) action distributions from a pattern answer.

    The answer is segmented by rank mentions ("when ... holds J/Jack ...");
    each segment yields one action distribution. Context sections may be
    marked with "public card not released/revealed" headers; without them
    every parsed rank row applies to all requested contexts.
    """
    rows = {}
    sections = _split_context_sections(text, contexts)
    for ctx, section in sections:
        for rank, segment in _split_by_rank(section):
            try:
                dist = extract_distribution(segment, ACTIONS)
            except ParseError:
                continue
            rows[(rank, ctx)] = dist.values
    if not rows:
        raise ParseError("no per-card action distributions found")
    return rows


def _split_context_sections(text: str, contexts):
    markers = {
        "prereveal": re.compile(r"public card (?:not |can't be |cannot be )(?:released|revealed|observed)", re.I),
        "postreveal": re.compile(r"public card (?:released|revealed|observed)", re.I),
    }
    hits = []
    for ctx in contexts:
        marker = markers.get(ctx)
        m = marker.search(text) if marker else None
        if m:
            hits.append((m.start(), ctx))
    if len(hits) < 2:
        return [(ctx, text) for ctx in contexts]
    hits.sort()
    sections = []
    for i, (start, ctx) in enumerate(hits):
        end = hits[i + 1][0] if i + 1 < len(hits) else len(text)
        sections.append((ctx, text[start:end]))
    return sections


def _split_by_rank(text: str):
    pattern = re.compile(r"\bholds?\s+(?:an?\s+|card\s+)?(J|Q|K|jack|queen|king)\b", re.I)
    matches = list(pattern.finditer(text))
    segments = []
    for i, m in enumerate(matches):
        rank = RANK_SYNONYMS[m.group(1).lower()]
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        segments.append((rank, text[m.end():end]))
    return segments


def extract_plan_numbers(text: str, legal_actions) -> dict:
    """Win/lose/draw rates and expected gain per plan action.

    Plans are located by their action keyword; rates come from win/lose/draw
    labels inside the plan's segment, the gain from an "expected ... gain"
    phrase followed by a signed number.
    """
    plans = {}
    segments = _split_by_action(text, legal_actions)
    for action, segment in segments.items():
        entry = {}
        try:
            rates = extract_distribution(segment, ("win", "lose", "draw"))
            entry["win_rate"] = rates.values["win"]
            entry["lose_rate"] = rates.values["lose"]
            entry["draw_rate"] = rates.values["draw"]
        except ParseError:
            pass
        gain = re.search(
            r"expected[\w\s]*?(?:gain|chips?)[^-+\d]*([-+]?\d+(?:\.\d+)?)", segment, re.I
        )
        if gain:
            entry["expected_gain"] = float(gain.group(1))
        if entry:
            plans[action] = entry
    if not plans:
        raise ParseError("no plan numbers found")
    return plans


def _split_by_action(text: str, legal_actions) -> dict:
    hits = []
    for action in legal_actions:
        for name in _synonyms_for(action):
            m = re.search(rf"\b(?:i|when i|if i)\s+(?:execute\s+)?{name}\b", text, re.I)
            if m is None:
                m = re.search(rf"\bplan\s*\d*\s*[:(]?\s*{name}\b", text, re.I)
            if m:
                hits.append((m.start(), action))
                break
    hits.sort()
    segments = {}
    for i, (start, action) in enumerate(hits):
        end = hits[i + 1][0] if i + 1 < len(hits) else len(text)
        segments[action] = text[start:end]
    return segments


def extract_best_plan(text: str, legal_actions) -> str | None:
    """Action named by the plan-selection sentence, if any."""
    m = re.search(r"(?:best|highest|select(?:ed)?)\D{0,40}\b(raise|bet|call|check|fold)\b", text, re.I)
    if m:
        action = ACTION_SYNONYMS[m.group(1).lower()]
        if action in legal_actions:
            return action
    return None
