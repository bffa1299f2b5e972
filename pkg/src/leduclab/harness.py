"""Seeded N-game matches between any two agents, with JSONL logs and stats.

Game seeds derive deterministically from the master seed and game index;
the small blind alternates between seats each game unless pinned. Every
decision and outcome is appended to the log as one JSON object per line, so
a scripted match replays byte-identically and downstream tools can recompute
every statistic from the log alone.
"""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .agent import AgentConfig, EvolvingAgent
from .baselines import CFRAgent, CFRPolicy, RandomAgent, RuleAgent, TableAgent, cfr_train
from .engine import ACTIONS, apply_action, new_game, observe, settle
from .memory import GameRecord, GameStep, MemoryStore
from .reasoners import BackendConfig, LLMReasoner, ScriptedReasoner

LOG_SCHEMA_VERSION = 1
STARTING_STACK = 100
SEED_STRIDE = 1_000_003

POSITIONS = ("small_blind", "big_blind")


class MatchAbort(RuntimeError):
    """An agent failed mid-match; the partial log has been flushed."""


@dataclass(frozen=True)
class AgentSpec:
    kind: str  # evolving | random | rule | cfr | table
    options: dict = field(default_factory=dict)

    def describe(self) -> dict:
        safe = {
            k: v for k, v in self.options.items()
            if isinstance(v, (str, int, float, bool, list, type(None)))
        }
        return {"kind": self.kind, "options": safe}


@dataclass(frozen=True)
class MatchConfig:
    agent_a: AgentSpec
    agent_b: AgentSpec
    n_games: int = 100
    master_seed: int = 0
    alternate_blinds: bool = True
    fixed_small_blind: int = 0
    round2_first_actor: str = "small_blind"
    log_path: str | None = None

    def __post_init__(self):
        if self.n_games < 1:
            raise ValueError("n_games must be >= 1")

    def game_seed(self, index: int) -> int:
        return self.master_seed * SEED_STRIDE + index

    def small_blind_for(self, index: int) -> int:
        if self.alternate_blinds:
            return index % 2
        return self.fixed_small_blind


@dataclass
class Decision:
    game: int
    seat: int
    position: str
    round_name: str
    action: str


@dataclass
class MatchResult:
    config: MatchConfig
    outcomes: list
    per_game_net: list[tuple[int, int]]
    decisions: list[Decision]
    totals: tuple[int, int]
    log_path: str | None

    @property
    def reproducible(self) -> bool:
        return _spec_reproducible(self.config.agent_a) and _spec_reproducible(self.config.agent_b)


def _spec_reproducible(spec: AgentSpec) -> bool:
    return spec.options.get("backend", "scripted") != "llm" or spec.kind != "evolving"


def build_agent(spec: AgentSpec, seat: int, config: MatchConfig):
    rng = random.Random(f"{config.master_seed}:{seat}:{spec.kind}")
    options = spec.options
    if spec.kind == "random":
        return RandomAgent(rng=rng)
    if spec.kind == "rule":
        return RuleAgent(table=options.get("table"))
    if spec.kind == "table":
        return TableAgent(options["table"], rng=rng)
    if spec.kind == "cfr":
        policy = options.get("policy")
        if policy is None and options.get("policy_path"):
            policy = CFRPolicy.load(options["policy_path"])
        if policy is None:
            policy = cfr_train(
                options.get("iterations", 100_000),
                seed=config.master_seed,
                round2_first_actor=config.round2_first_actor,
            )
        return CFRAgent(policy, rng=rng, greedy=options.get("greedy", False))
    if spec.kind == "evolving":
        backend_name = options.get("backend", "scripted")
        if backend_name == "llm":
            backend = LLMReasoner(
                BackendConfig(
                    endpoint=options.get("endpoint", ""),
                    model=options.get("model", ""),
                    temperature=options.get("llm_temperature", 0.7),
                ),
                transport=options.get("transport"),
            )
        else:
            backend = ScriptedReasoner()
        agent_config = AgentConfig(
            ablations=frozenset(options.get("ablations", ())),
            evolve_every=options.get("evolve_every", 1),
            style=options.get("style", "auto"),
            act_mode=options.get("act_mode", "greedy"),
            temperature=options.get("temperature", 0.7),
            history_window=options.get("history_window"),
        )
        memory = options.get("memory") or MemoryStore(path=options.get("memory_path"))
        agent = EvolvingAgent(backend=backend, memory=memory, config=agent_config, rng=rng)
        if options.get("policy_in"):
            from .policy import PatternReport, PolicyTable

            doc = json.loads(Path(options["policy_in"]).read_text())
            agent.self_pattern = PatternReport.from_table(
                PolicyTable.from_json_dict(doc["self"]), rationale="warm start"
            )
            agent.env_pattern = PatternReport.from_table(
                PolicyTable.from_json_dict(doc["env"]), rationale="warm start"
            )
        return agent
    raise ValueError(f"unknown agent kind {spec.kind!r}")


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class _LogWriter:
    def __init__(self, path: str | None):
        self.path = Path(path) if path else None
        self._fh = self.path.open("w") if self.path else None

    def write(self, obj: dict) -> None:
        if self._fh:
            self._fh.write(_dump(obj) + "\n")

    def flush(self) -> None:
        if self._fh:
            self._fh.flush()

    def close(self) -> None:
        if self._fh:
            self._fh.close()
            self._fh = None


def run_match(config: MatchConfig, agents: tuple | None = None) -> MatchResult:
    """Play the configured match; returns accumulated results and writes the
    JSONL log when a path is configured."""
    if agents is None:
        agents = (build_agent(config.agent_a, 0, config), build_agent(config.agent_b, 1, config))
    writer = _LogWriter(config.log_path)
    result = MatchResult(
        config=config,
        outcomes=[],
        per_game_net=[],
        decisions=[],
        totals=(0, 0),
        log_path=config.log_path,
    )
    reproducible = result.reproducible
    writer.write(
        {
            "type": "header",
            "schema_version": LOG_SCHEMA_VERSION,
            "n_games": config.n_games,
            "master_seed": config.master_seed,
            "agents": [config.agent_a.describe(), config.agent_b.describe()],
            "blind_rule": "alternate" if config.alternate_blinds
            else f"fixed:{config.fixed_small_blind}",
            "round2_first_actor": config.round2_first_actor,
            "starting_stack": STARTING_STACK,
            "reproducible": reproducible,
        }
    )
    totals = [0, 0]
    try:
        for index in range(config.n_games):
            seed = config.game_seed(index)
            small_blind = config.small_blind_for(index)
            state = new_game(
                seed,
                small_blind_player=small_blind,
                round2_first_actor=config.round2_first_actor,
            )
            for seat, agent in enumerate(agents):
                agent.begin_game(index, seat, small_blind, config.round2_first_actor)
            steps = []
            while not state.terminal:
                seat = state.to_act
                obs = observe(state, seat)
                round_name = state.round_name
                try:
                    action = agents[seat].act(obs)
                except Exception as exc:
                    writer.flush()
                    writer.close()
                    raise MatchAbort(
                        f"agent {seat} ({ (config.agent_a, config.agent_b)[seat].kind }) "
                        f"failed in game {index} ({round_name}): {exc}"
                    ) from exc
                position = "small_blind" if seat == small_blind else "big_blind"
                trace = getattr(agents[seat], "last_trace", None)
                steps.append(GameStep(player=seat, observation=obs, action=action))
                result.decisions.append(
                    Decision(
                        game=index, seat=seat, position=position,
                        round_name=round_name, action=action,
                    )
                )
                writer.write(
                    {
                        "type": "step",
                        "game": index,
                        "seat": seat,
                        "position": position,
                        "round": round_name,
                        "observation": obs.to_json_dict(),
                        "action": action,
                        "say": None,
                        "trace": trace.to_json_dict() if trace is not None else None,
                    }
                )
                for agent in agents:
                    agent.observe_step(seat, action, round_name)
                state = apply_action(state, action)
            outcome = settle(state)
            record = GameRecord(
                game_index=index,
                seed=seed,
                small_blind=small_blind,
                steps=tuple(steps),
                revealed_cards=state.private_cards,
                public_card=state.public_card,
                outcome=outcome,
                round2_first_actor=config.round2_first_actor,
            )
            for agent in agents:
                try:
                    agent.end_game(record)
                except Exception as exc:
                    writer.flush()
                    writer.close()
                    raise MatchAbort(f"agent end-of-game hook failed in game {index}: {exc}") from exc
            totals[0] += outcome.net_chips[0]
            totals[1] += outcome.net_chips[1]
            result.outcomes.append(outcome)
            result.per_game_net.append(outcome.net_chips)
            writer.write(
                {
                    "type": "outcome",
                    "game": index,
                    "seed": seed,
                    "small_blind": small_blind,
                    "kind": outcome.kind,
                    "winner": outcome.winner,
                    "net_chips": list(outcome.net_chips),
                    "logged_payoff": outcome.logged_payoff,
                    "revealed_cards": list(state.private_cards),
                    "public_card": state.public_card,
                }
            )
    finally:
        writer.close()
    result.totals = (totals[0], totals[1])
    return result


@dataclass(frozen=True)
class WindowStat:
    index: int
    games: tuple[int, int]
    gains: tuple[int, ...]
    total: int
    mean: float
    median: float


def window_stats(result: MatchResult, window: int = 10, seat: int = 0) -> list[WindowStat]:
    """Chip gains of each non-overlapping window of games for one seat."""
    gains = [net[seat] for net in result.per_game_net]
    if len(gains) < window:
        raise ValueError(f"need at least {window} games, have {len(gains)}")
    stats = []
    for i in range(0, len(gains) - window + 1, window):
        chunk = gains[i : i + window]
        stats.append(
            WindowStat(
                index=len(stats),
                games=(i, i + window),
                gains=tuple(chunk),
                total=sum(chunk),
                mean=statistics.fmean(chunk),
                median=float(statistics.median(chunk)),
            )
        )
    return stats


def position_stats(result: MatchResult) -> dict:
    """Per seat and blind position: the proportion of each action taken."""
    table: dict = {}
    for seat in (0, 1):
        table[seat] = {}
        for position in POSITIONS:
            actions = [
                d.action for d in result.decisions
                if d.seat == seat and d.position == position
            ]
            if actions:
                table[seat][position] = {
                    a: actions.count(a) / len(actions) for a in ACTIONS
                }
            else:
                table[seat][position] = {a: 0.0 for a in ACTIONS}
    return table


ABLATION_ROWS = (None, "policy", "belief", "plan", "reflection")


def ablation_suite(
    base_config: MatchConfig,
    opponents: dict[str, AgentSpec],
    carry_memory: bool = False,
) -> dict:
    """Five matches (full agent + one per single ablation) per opponent.

    Memory is fresh per cell unless ``carry_memory`` shares one store across
    the whole suite. Returns {row_label: {opponent_label: total or error}}.
    """
    report: dict = {}
    shared_memory = MemoryStore() if carry_memory else None
    for ablation in ABLATION_ROWS:
        label = "full" if ablation is None else f"w/o {ablation}"
        report[label] = {}
        for name, opponent in opponents.items():
            options = dict(base_config.agent_a.options)
            ablations = set(options.get("ablations", ()))
            if ablation:
                ablations.add(ablation)
            options["ablations"] = sorted(ablations)
            if shared_memory is not None:
                options["memory"] = shared_memory
            config = MatchConfig(
                agent_a=AgentSpec(kind=base_config.agent_a.kind, options=options),
                agent_b=opponent,
                n_games=base_config.n_games,
                master_seed=base_config.master_seed,
                alternate_blinds=base_config.alternate_blinds,
                fixed_small_blind=base_config.fixed_small_blind,
                round2_first_actor=base_config.round2_first_actor,
                log_path=None,
            )
            try:
                report[label][name] = run_match(config).totals[0]
            except Exception as exc:  # record the cell failure, keep going
                report[label][name] = f"error: {exc}"
    return report


def load_log(path):
    """Parse a match log into (header, steps, outcomes)."""
    header = None
    steps = []
    outcomes = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON ({exc})") from exc
            kind = obj.get("type")
            if kind == "header":
                header = obj
            elif kind == "step":
                steps.append(obj)
            elif kind == "outcome":
                outcomes.append(obj)
            else:
                raise ValueError(f"{path}:{lineno}: unknown record type {kind!r}")
    if header is None:
        raise ValueError(f"{path}: missing header line")
    return header, steps, outcomes


def result_from_log(path) -> MatchResult:
    """Rebuild the statistics view of a match from its log."""
    header, steps, outcomes = load_log(path)
    config = MatchConfig(
        agent_a=AgentSpec(kind=header["agents"][0]["kind"]),
        agent_b=AgentSpec(kind=header["agents"][1]["kind"]),
        n_games=header["n_games"],
        master_seed=header["master_seed"],
        alternate_blinds=header["blind_rule"] == "alternate",
        round2_first_actor=header["round2_first_actor"],
        log_path=str(path),
    )
    decisions = [
        Decision(
            game=s["game"], seat=s["seat"], position=s["position"],
            round_name=s["round"], action=s["action"],
        )
        for s in steps
    ]
    per_game = [tuple(o["net_chips"]) for o in outcomes]
    totals = (sum(n[0] for n in per_game), sum(n[1] for n in per_game))
    from .engine import Outcome

    return MatchResult(
        config=config,
        outcomes=[
            Outcome(kind=o["kind"], winner=o["winner"], net_chips=tuple(o["net_chips"]))
            for o in outcomes
        ],
        per_game_net=per_game,
        decisions=decisions,
        totals=totals,
        log_path=str(path),
    )
