"""Command line entry points: run matches, ablation suites, stats, CFR training.

A config file of KEY=VALUE lines (one per line, # comments allowed) can seed
any long option; explicit command-line flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .baselines import CFRPolicy, cfr_train, exploitability
from .engine import ACTIONS
from .harness import (
    AgentSpec,
    MatchConfig,
    ablation_suite,
    position_stats,
    result_from_log,
    run_match,
    window_stats,
)

AGENT_KINDS = ("evolving", "random", "rule", "cfr")


def _read_config_file(path: str) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{lineno}: expected KEY=VALUE")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _agent_spec(kind: str, args, seat: str) -> AgentSpec:
    if kind not in AGENT_KINDS:
        raise SystemExit(f"unknown agent kind {kind!r}; choose from {AGENT_KINDS}")
    options: dict = {}
    if kind == "evolving":
        options["backend"] = args.backend
        if args.backend == "llm":
            options["endpoint"] = args.endpoint or ""
            options["model"] = args.model or ""
        if args.ablate:
            options["ablations"] = sorted(set(args.ablate))
        options["evolve_every"] = args.evolve_every
        if args.history_window is not None:
            options["history_window"] = args.history_window
        if seat == "a":
            if args.memory_path:
                options["memory_path"] = args.memory_path
            if args.policy_in:
                options["policy_in"] = args.policy_in
    if kind == "cfr":
        options["iterations"] = args.cfr_iters
        if args.cfr_policy_path:
            options["policy_path"] = args.cfr_policy_path
    return AgentSpec(kind=kind, options=options)


def _match_config(args, spec_a: AgentSpec, spec_b: AgentSpec, log_path) -> MatchConfig:
    return MatchConfig(
        agent_a=spec_a,
        agent_b=spec_b,
        n_games=args.games,
        master_seed=args.seed,
        alternate_blinds=not args.fixed_blinds,
        round2_first_actor=args.round2_first_actor,
        log_path=log_path,
    )


def _write_policy_out(agents, path: str) -> None:
    agent = agents[0]
    doc = {
        "env": agent.env_pattern.table.to_json_dict(),
        "self": agent.self_pattern.table.to_json_dict(),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1))


def cmd_run(args) -> int:
    spec_a = _agent_spec(args.a, args, "a")
    spec_b = _agent_spec(args.b, args, "b")
    config = _match_config(args, spec_a, spec_b, args.out)
    from .harness import build_agent

    agents = (build_agent(spec_a, 0, config), build_agent(spec_b, 1, config))
    result = run_match(config, agents=agents)
    if args.policy_out and spec_a.kind == "evolving":
        _write_policy_out(agents, args.policy_out)
    print(f"games: {config.n_games}")
    print(f"total chips: {args.a}={result.totals[0]:+d} {args.b}={result.totals[1]:+d}")
    if args.out:
        print(f"log: {args.out}")
    return 0


def cmd_ablate(args) -> int:
    spec_a = _agent_spec("evolving", args, "a")
    opponents = {}
    for name in args.opponents.split(","):
        name = name.strip()
        opponents[name] = _agent_spec(name, args, "b")
    base = _match_config(args, spec_a, next(iter(opponents.values())), None)
    report = ablation_suite(base, opponents, carry_memory=args.carry_memory)
    writer = csv.writer(sys.stdout)
    writer.writerow(["strategy"] + list(opponents))
    for row_label, cells in report.items():
        writer.writerow([row_label] + [cells[name] for name in opponents])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["strategy"] + list(opponents))
            for row_label, cells in report.items():
                w.writerow([row_label] + [cells[name] for name in opponents])
        print(f"report: {args.out}", file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    result = result_from_log(args.infile)
    out = io.StringIO()
    writer = csv.writer(out)
    if args.windows:
        writer.writerow(["window", "games", "total", "mean", "median"])
        for stat in window_stats(result, window=args.window_size):
            writer.writerow(
                [stat.index, f"{stat.games[0]}-{stat.games[1]}",
                 stat.total, f"{stat.mean:.6f}", f"{stat.median:.6f}"]
            )
    if args.positions:
        writer.writerow(["seat", "position"] + list(ACTIONS))
        table = position_stats(result)
        for seat in (0, 1):
            for position, row in table[seat].items():
                writer.writerow(
                    [seat, position] + [f"{row[a]:.6f}" for a in ACTIONS]
                )
    if not args.windows and not args.positions:
        writer.writerow(["games", "total_a", "total_b"])
        writer.writerow([len(result.outcomes), result.totals[0], result.totals[1]])
    text = out.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_cfr_train(args) -> int:
    policy = cfr_train(args.cfr_iters, seed=args.seed,
                       round2_first_actor=args.round2_first_actor)
    policy.save(args.out)
    line = f"trained {policy.iterations} iterations -> {args.out}"
    if args.report_exploitability:
        line += f" (exploitability {exploitability(policy):.6f} chips/hand)"
    print(line)
    return 0


def build_parser(config_defaults: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leduclab",
        description="Leduc Hold'em laboratory: evolving agent, baselines, seeded matches.",
    )
    parser.add_argument("--config", help="KEY=VALUE file providing option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--games", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--fixed-blinds", action="store_true",
                       help="keep seat 0 as small blind instead of alternating")
        p.add_argument("--round2-first-actor", default="small_blind",
                       choices=("small_blind", "big_blind", "seat0"))
        p.add_argument("--backend", default="scripted", choices=("scripted", "llm"))
        p.add_argument("--endpoint", help="chat-completion endpoint URL (llm backend)")
        p.add_argument("--model", help="model name (llm backend)")
        p.add_argument("--ablate", action="append", default=[],
                       choices=("policy", "belief", "plan", "reflection"),
                       help="disable one cognition stage (repeatable)")
        p.add_argument("--evolve-every", type=int, default=1)
        p.add_argument("--history-window", type=int, default=None,
                       help="games of memory fed to evolution (default: all)")
        p.add_argument("--memory-path", help="JSONL file persisting agent A's memory")
        p.add_argument("--policy-in", help="warm-start pattern tables (JSON)")
        p.add_argument("--policy-out", help="write agent A's pattern tables (JSON)")
        p.add_argument("--cfr-iters", type=int, default=100_000)
        p.add_argument("--cfr-policy-path", help="load a trained CFR policy (JSON)")

    p_run = sub.add_parser("run", help="play one match between two agents")
    p_run.add_argument("--a", required=True, help=f"agent A kind: {', '.join(AGENT_KINDS)}")
    p_run.add_argument("--b", required=True, help="agent B kind")
    p_run.add_argument("--out", help="JSONL log path")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_abl = sub.add_parser("ablate", help="full agent plus four single ablations")
    p_abl.add_argument("--opponents", default="rule,random",
                       help="comma-separated opponent kinds (columns)")
    p_abl.add_argument("--out", help="CSV report path")
    p_abl.add_argument("--carry-memory", action="store_true",
                       help="share one game memory across every cell instead "
                            "of starting each match fresh")
    common(p_abl)
    p_abl.set_defaults(func=cmd_ablate)

    p_stats = sub.add_parser("stats", help="recompute statistics from a match log")
    p_stats.add_argument("--in", dest="infile", required=True, help="match JSONL log")
    p_stats.add_argument("--windows", action="store_true", help="per-window chip gains")
    p_stats.add_argument("--window-size", type=int, default=10)
    p_stats.add_argument("--positions", action="store_true",
                         help="action proportions by blind position")
    p_stats.add_argument("--out", help="write CSV here instead of stdout")
    p_stats.set_defaults(func=cmd_stats)

    p_cfr = sub.add_parser("cfr-train", help="train the CFR baseline policy")
    p_cfr.add_argument("--out", required=True, help="policy JSON path")
    p_cfr.add_argument("--seed", type=int, default=0)
    p_cfr.add_argument("--cfr-iters", type=int, default=100_000)
    p_cfr.add_argument("--round2-first-actor", default="small_blind",
                       choices=("small_blind", "big_blind", "seat0"))
    p_cfr.add_argument("--report-exploitability", action="store_true")
    p_cfr.set_defaults(func=cmd_cfr_train)

    if config_defaults:
        for p in (p_run, p_abl, p_stats, p_cfr):
            known = {
                action.dest for action in p._actions  # noqa: SLF001
            }
            p.set_defaults(**{k: v for k, v in config_defaults.items() if k in known})
    return parser


def _coerce(value: str):
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    try:
        return int(value)
    except ValueError:
        return value


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    defaults = None
    if "--config" in argv:
        path = argv[argv.index("--config") + 1]
        defaults = {k: _coerce(v) for k, v in _read_config_file(path).items()}
    args = build_parser(defaults).parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
