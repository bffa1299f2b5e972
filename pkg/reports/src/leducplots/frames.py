"""Parsing of match JSONL logs into flat row frames.

Every number downstream is recomputed from these rows; nothing is read from
precomputed summaries. Malformed lines fail loudly with their line number.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from pathlib import Path

ACCEPTED_SCHEMAS = (1,)
ACTIONS = ("raise", "call", "check", "fold")
POSITIONS = ("small_blind", "big_blind")


class LogFormatError(ValueError):
    """Raised with file and line number when a log cannot be parsed."""


@dataclass(frozen=True)
class StepRow:
    game: int
    seat: int
    position: str
    round_name: str
    action: str


@dataclass(frozen=True)
class OutcomeRow:
    game: int
    net_chips: tuple[int, int]
    winner: int | None
    kind: str


@dataclass(frozen=True)
class LogFrame:
    path: str
    header: dict
    steps: tuple[StepRow, ...]
    outcomes: tuple[OutcomeRow, ...]

    @property
    def n_games(self) -> int:
        return len(self.outcomes)

    @property
    def agents(self) -> tuple[str, str]:
        specs = self.header.get("agents", [{}, {}])
        return (specs[0].get("kind", "?"), specs[1].get("kind", "?"))

    def gains(self, seat: int = 0) -> list[int]:
        return [o.net_chips[seat] for o in self.outcomes]

    def totals(self) -> tuple[int, int]:
        return (sum(self.gains(0)), sum(self.gains(1)))


def load_frame(path) -> LogFrame:
    path = Path(path)
    header = None
    steps = []
    outcomes = []
    rows = 0
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogFormatError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            kind = obj.get("type")
            try:
                if kind == "header":
                    if obj.get("schema_version") not in ACCEPTED_SCHEMAS:
                        raise LogFormatError(
                            f"{path}:{lineno}: unsupported schema_version "
                            f"{obj.get('schema_version')!r}"
                        )
                    header = obj
                elif kind == "step":
                    rows += 1
                    steps.append(
                        StepRow(
                            game=obj["game"],
                            seat=obj["seat"],
                            position=obj["position"],
                            round_name=obj["round"],
                            action=obj["action"],
                        )
                    )
                elif kind == "outcome":
                    rows += 1
                    outcomes.append(
                        OutcomeRow(
                            game=obj["game"],
                            net_chips=tuple(obj["net_chips"]),
                            winner=obj["winner"],
                            kind=obj["kind"],
                        )
                    )
                else:
                    raise LogFormatError(f"{path}:{lineno}: unknown record type {kind!r}")
            except KeyError as exc:
                raise LogFormatError(f"{path}:{lineno}: missing field {exc}") from exc
    if header is None:
        raise LogFormatError(f"{path}:1: missing header line")
    return LogFrame(path=str(path), header=header, steps=tuple(steps), outcomes=tuple(outcomes))


@dataclass(frozen=True)
class WindowRow:
    index: int
    games: tuple[int, int]
    gains: tuple[int, ...]
    total: int
    mean: float
    median: float


def window_rows(frame: LogFrame, window: int = 10, seat: int = 0) -> list[WindowRow]:
    gains = frame.gains(seat)
    if len(gains) < window:
        raise LogFormatError(
            f"{frame.path}: need at least {window} games for windows, have {len(gains)}"
        )
    rows = []
    for i in range(0, len(gains) - window + 1, window):
        chunk = gains[i : i + window]
        rows.append(
            WindowRow(
                index=len(rows),
                games=(i, i + window),
                gains=tuple(chunk),
                total=sum(chunk),
                mean=statistics.fmean(chunk),
                median=float(statistics.median(chunk)),
            )
        )
    return rows


def position_rows(frame: LogFrame, seat: int = 0) -> dict:
    """Action proportions by blind position for one seat."""
    table = {}
    for position in POSITIONS:
        actions = [s.action for s in frame.steps if s.seat == seat and s.position == position]
        if not actions:
            table[position] = {a: 0.0 for a in ACTIONS}
            continue
        table[position] = {a: actions.count(a) / len(actions) for a in ACTIONS}
    return table
