"""Match totals recomputed from logs, as CSV and aligned text."""

from __future__ import annotations

import csv
import io
import statistics

from .frames import LogFrame

COLUMNS = ("matchup", "games", "total_a", "total_b", "wins_a", "draws", "win_rate_a")


def summary_rows(frames: list[LogFrame]) -> list[dict]:
    rows = []
    for frame in frames:
        totals = frame.totals()
        wins = sum(1 for o in frame.outcomes if o.net_chips[0] > 0)
        draws = sum(1 for o in frame.outcomes if o.net_chips[0] == 0)
        rows.append(
            {
                "matchup": f"{frame.agents[0]} vs {frame.agents[1]}",
                "games": frame.n_games,
                "total_a": totals[0],
                "total_b": totals[1],
                "wins_a": wins,
                "draws": draws,
                "win_rate_a": round(wins / frame.n_games, 6),
            }
        )
    if len(rows) > 1:
        rows.append(
            {
                "matchup": "average",
                "games": round(statistics.fmean(r["games"] for r in rows), 6),
                "total_a": round(statistics.fmean(r["total_a"] for r in rows), 6),
                "total_b": round(statistics.fmean(r["total_b"] for r in rows), 6),
                "wins_a": round(statistics.fmean(r["wins_a"] for r in rows), 6),
                "draws": round(statistics.fmean(r["draws"] for r in rows), 6),
                "win_rate_a": round(statistics.fmean(r["win_rate_a"] for r in rows), 6),
            }
        )
    return rows


def to_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=COLUMNS)
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()


def to_text(rows: list[dict]) -> str:
    widths = {
        col: max(len(col), *(len(str(r[col])) for r in rows)) for col in COLUMNS
    }
    lines = ["  ".join(col.ljust(widths[col]) for col in COLUMNS)]
    lines.append("  ".join("-" * widths[col] for col in COLUMNS))
    for row in rows:
        lines.append("  ".join(str(row[col]).ljust(widths[col]) for col in COLUMNS))
    return "\n".join(lines) + "\n"
