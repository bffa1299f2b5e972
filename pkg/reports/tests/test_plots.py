"""Report tooling cross-checked against the primary CLI's own statistics.

The sample logs are produced by invoking the `leduclab` command line, and the
harness numbers come from its `stats` output: the secondary touches only the
published interfaces (CLI + JSONL schema).
"""

import csv
import io
import json
import subprocess
import sys

import pytest

from leducplots.cli import main as plots_main
from leducplots.frames import ACTIONS, LogFormatError, load_frame, position_rows, window_rows
from leducplots.summary import summary_rows, to_csv


def run_primary(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "leduclab.cli", *argv],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


@pytest.fixture(scope="module")
def sample_log(tmp_path_factory):
    path = tmp_path_factory.mktemp("logs") / "sample.jsonl"
    run_primary(
        "run", "--a", "evolving", "--b", "rule",
        "--games", "100", "--seed", "7", "--out", str(path),
    )
    return path


@pytest.fixture(scope="module")
def second_log(tmp_path_factory):
    path = tmp_path_factory.mktemp("logs") / "second.jsonl"
    run_primary(
        "run", "--a", "random", "--b", "random",
        "--games", "40", "--seed", "3", "--out", str(path),
    )
    return path


def test_frame_row_count_matches_log(sample_log):
    frame = load_frame(sample_log)
    lines = [l for l in sample_log.read_text().splitlines() if l.strip()]
    assert len(frame.steps) + len(frame.outcomes) == len(lines) - 1
    assert frame.n_games == 100
    assert frame.header["schema_version"] == 1


def test_window_means_match_primary_stats_to_6_decimals(sample_log):
    stdout = run_primary("stats", "--in", str(sample_log), "--windows")
    harness = list(csv.DictReader(io.StringIO(stdout)))
    ours = window_rows(load_frame(sample_log), window=10)
    assert len(ours) == len(harness) == 10
    for mine, theirs in zip(ours, harness):
        assert f"{mine.mean:.6f}" == f"{float(theirs['mean']):.6f}"
        assert f"{mine.median:.6f}" == f"{float(theirs['median']):.6f}"
        assert mine.total == int(theirs["total"])


def test_position_proportions_match_primary_stats_to_6_decimals(sample_log):
    stdout = run_primary("stats", "--in", str(sample_log), "--positions")
    harness = {
        (int(row["seat"]), row["position"]): row
        for row in csv.DictReader(io.StringIO(stdout))
    }
    for seat in (0, 1):
        ours = position_rows(load_frame(sample_log), seat=seat)
        for position, row in ours.items():
            theirs = harness[(seat, position)]
            for action in ACTIONS:
                assert f"{row[action]:.6f}" == f"{float(theirs[action]):.6f}"


def test_windows_command_writes_figure(sample_log, tmp_path, capsys):
    out = tmp_path / "windows.png"
    rc = plots_main(["windows", "--in", str(sample_log), "--out", str(out)])
    assert rc == 0
    assert out.exists() and out.stat().st_size > 0
    printed = capsys.readouterr().out
    assert "mean" in printed and "window 9" in printed


def test_positions_command_writes_figure(sample_log, tmp_path, capsys):
    out = tmp_path / "positions.png"
    rc = plots_main(["positions", "--in", str(sample_log), "--out", str(out)])
    assert rc == 0
    assert out.exists() and out.stat().st_size > 0
    printed = capsys.readouterr().out
    assert "small_blind" in printed


def test_summary_command_single_and_multiple(sample_log, second_log, tmp_path, capsys):
    rc = plots_main(["summary", "--in", str(sample_log)])
    assert rc == 0
    single = capsys.readouterr().out
    frame = load_frame(sample_log)
    assert str(frame.totals()[0]) in single

    out = tmp_path / "summary.csv"
    rc = plots_main(["summary", "--in", str(sample_log), str(second_log), "--out", str(out)])
    assert rc == 0
    assert out.exists() and out.stat().st_size > 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3  # two logs plus the average row
    assert rows[2]["matchup"] == "average"


def test_summary_csv_round_trips(sample_log, second_log):
    frames = [load_frame(sample_log), load_frame(second_log)]
    rows = summary_rows(frames)
    reloaded = list(csv.DictReader(io.StringIO(to_csv(rows))))
    for original, parsed in zip(rows, reloaded):
        for key, value in original.items():
            assert float(parsed[key]) == pytest.approx(float(value)) if _is_number(value) \
                else parsed[key] == str(value)


def _is_number(value):
    try:
        float(value)
        return True
    except (TypeError, ValueError):
        return False


def test_constant_series_collapses_boxes(tmp_path):
    # Hand-built minimal log: every game nets +1 for seat 0.
    path = tmp_path / "flat.jsonl"
    lines = [json.dumps({
        "type": "header", "schema_version": 1, "n_games": 20, "master_seed": 0,
        "agents": [{"kind": "x", "options": {}}, {"kind": "y", "options": {}}],
        "blind_rule": "alternate", "round2_first_actor": "small_blind",
        "starting_stack": 100, "reproducible": True,
    })]
    for i in range(20):
        lines.append(json.dumps({
            "type": "outcome", "game": i, "seed": i, "small_blind": i % 2,
            "kind": "fold", "winner": 0, "net_chips": [1, -1], "logged_payoff": 0.5,
            "revealed_cards": ["SJ", "SQ"], "public_card": None,
        }))
    path.write_text("\n".join(lines) + "\n")
    rows = window_rows(load_frame(path), window=10)
    assert all(r.gains == (1,) * 10 for r in rows)
    assert all(r.mean == 1.0 and r.median == 1.0 for r in rows)
    out = tmp_path / "flat.png"
    assert plots_main(["windows", "--in", str(path), "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_malformed_log_exits_nonzero_with_line_number(tmp_path, capsys):
    path = tmp_path / "broken.jsonl"
    path.write_text('{"type": "header", "schema_version": 1, "agents": []}\n{oops\n')
    rc = plots_main(["windows", "--in", str(path), "--out", str(tmp_path / "x.png")])
    assert rc != 0
    err = capsys.readouterr().err
    assert "broken.jsonl:2" in err


def test_unsupported_schema_rejected(tmp_path):
    path = tmp_path / "future.jsonl"
    path.write_text('{"type": "header", "schema_version": 99}\n')
    with pytest.raises(LogFormatError, match="schema_version"):
        load_frame(path)


def test_too_few_games_for_windows(tmp_path, capsys):
    path = tmp_path / "short.jsonl"
    run_primary("run", "--a", "random", "--b", "random", "--games", "5",
                "--seed", "1", "--out", str(path))
    rc = plots_main(["windows", "--in", str(path), "--out", str(tmp_path / "x.png")])
    assert rc != 0
    assert "at least 10" in capsys.readouterr().err
