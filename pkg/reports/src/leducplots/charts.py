"""Static figures: per-window chip-gain boxes and blind-position bars."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .frames import ACTIONS, POSITIONS, LogFrame, position_rows, window_rows


def plot_windows(frame: LogFrame, out_path, window: int = 10, seat: int = 0):
    """Boxes of per-game gains in each window with the mean line overlaid."""
    rows = window_rows(frame, window=window, seat=seat)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.boxplot(
        [row.gains for row in rows],
        positions=range(1, len(rows) + 1),
        widths=0.6,
        patch_artist=True,
        boxprops={"facecolor": "0.85", "color": "0.35"},
        medianprops={"color": "0.25"},
        whiskerprops={"color": "0.35"},
        capprops={"color": "0.35"},
        flierprops={"markersize": 3, "markerfacecolor": "0.5"},
    )
    ax.plot(
        range(1, len(rows) + 1),
        [row.mean for row in rows],
        color="tab:orange",
        marker="o",
        label="mean gain",
    )
    ax.axhline(0, color="0.7", linewidth=0.8)
    ax.set_xlabel(f"window of {window} games")
    ax.set_ylabel("chip gain per game")
    agents = frame.agents
    ax.set_title(f"Chip gains per {window}-game window: {agents[seat]} vs {agents[1 - seat]}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(Path(out_path), dpi=150)
    plt.close(fig)
    return rows


def plot_positions(frame: LogFrame, out_path, seat: int = 0):
    """Grouped bars of action proportions in each blind position."""
    table = position_rows(frame, seat=seat)
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.38
    xs = range(len(ACTIONS))
    colors = {"small_blind": "tab:blue", "big_blind": "tab:red"}
    for offset, position in zip((-width / 2, width / 2), POSITIONS):
        ax.bar(
            [x + offset for x in xs],
            [table[position][a] for a in ACTIONS],
            width=width,
            label=position.replace("_", " "),
            color=colors[position],
            alpha=0.85,
        )
    ax.set_xticks(list(xs))
    ax.set_xticklabels(ACTIONS)
    ax.set_ylabel("proportion of decisions")
    ax.set_ylim(0, 1)
    ax.set_title(f"Actions by blind position: {frame.agents[seat]}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(Path(out_path), dpi=150)
    plt.close(fig)
    return table
