"""`plots` command: windows and positions charts plus the summary table."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .charts import plot_positions, plot_windows
from .frames import LogFormatError, load_frame
from .summary import summary_rows, to_csv, to_text


def cmd_windows(args) -> int:
    frame = load_frame(args.infile)
    rows = plot_windows(frame, args.out, window=args.window_size, seat=args.seat)
    for row in rows:
        print(f"window {row.index} games {row.games[0]}-{row.games[1]}: "
              f"total {row.total:+d} mean {row.mean:.6f} median {row.median:.6f}")
    print(f"figure: {args.out}")
    return 0


def cmd_positions(args) -> int:
    frame = load_frame(args.infile)
    table = plot_positions(frame, args.out, seat=args.seat)
    for position, row in table.items():
        cells = " ".join(f"{action}={row[action]:.6f}" for action in row)
        print(f"{position}: {cells}")
    print(f"figure: {args.out}")
    return 0


def cmd_summary(args) -> int:
    frames = [load_frame(path) for path in args.infiles]
    rows = summary_rows(frames)
    sys.stdout.write(to_text(rows))
    if args.out:
        Path(args.out).write_text(to_csv(rows))
        print(f"csv: {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render figures and tables from leduclab match logs "
        "(every number is recomputed from the raw log).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_win = sub.add_parser("windows", help="chip-gain box plot per game window")
    p_win.add_argument("--in", dest="infile", required=True, help="match JSONL log")
    p_win.add_argument("--out", required=True, help="output image path (PNG)")
    p_win.add_argument("--window-size", type=int, default=10)
    p_win.add_argument("--seat", type=int, default=0, choices=(0, 1))
    p_win.set_defaults(func=cmd_windows)

    p_pos = sub.add_parser("positions", help="action proportions by blind position")
    p_pos.add_argument("--in", dest="infile", required=True, help="match JSONL log")
    p_pos.add_argument("--out", required=True, help="output image path (PNG)")
    p_pos.add_argument("--seat", type=int, default=0, choices=(0, 1))
    p_pos.set_defaults(func=cmd_positions)

    p_sum = sub.add_parser("summary", help="totals and win rate per log")
    p_sum.add_argument("--in", dest="infiles", required=True, nargs="+",
                       help="one or more match JSONL logs")
    p_sum.add_argument("--out", help="also write the table as CSV here")
    p_sum.set_defaults(func=cmd_summary)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LogFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
