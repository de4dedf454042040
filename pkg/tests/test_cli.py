import json
from pathlib import Path

import pytest

from hri_sim.cli import _parse_say, build_parser, main


def test_parse_say_splits_text_and_time():
    assert _parse_say("hurry up@2000") == (2000, "hurry up")
    with pytest.raises(Exception):
        _parse_say("no time marker")


def test_run_command_writes_log_and_exits_zero(tmp_path, capsys):
    code = main([
        "run", "--scenario", "corridor6", "--condition", "scripted",
        "--backend", "scripted", "--seed", "1", "--policy", "silent",
        "--out", str(tmp_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "completed" in out
    logs = list(tmp_path.glob("*.ndjson"))
    assert len(logs) == 1
    lines = logs[0].read_text().splitlines()
    assert json.loads(lines[0])["tag"] == "session_start"
    assert json.loads(lines[-1])["status"] == "completed"


def test_run_command_with_operator_say(tmp_path, capsys):
    code = main([
        "run", "--condition", "scripted", "--backend", "scripted",
        "--policy", "silent", "--say", "please hurry@5000",
        "--out", str(tmp_path),
    ])
    assert code == 0
    log_file = next(tmp_path.glob("*.ndjson"))
    phrases = [json.loads(l) for l in log_file.read_text().splitlines()
               if json.loads(l)["tag"] == "phrase"]
    assert phrases and phrases[0]["source"] == "operator"
    assert phrases[0]["text"] == "please hurry"


def test_run_command_llm_replay(capsys):
    code = main([
        "run", "--condition", "llm", "--backend", "replay:@clarifier_corridor6",
        "--policy", "clarifier",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "dialog" in out  # step V dialog phase is reported


def test_bench_command_writes_reports(tmp_path, capsys):
    code = main([
        "bench", "--sessions", "1", "--policies", "silent",
        "--conditions", "scripted,llm",
        "--backend", "replay:@clarifier_corridor6", "--out", str(tmp_path),
    ])
    assert code == 0
    assert (tmp_path / "metrics.csv").is_file()
    assert (tmp_path / "report.md").is_file()
    out = capsys.readouterr().out
    assert "costlier condition" in out


def test_idle_policy_run_reports_failure(tmp_path):
    code = main([
        "run", "--condition", "scripted", "--backend", "scripted",
        "--policy", "idle", "--out", str(tmp_path),
    ])
    assert code == 1  # aborted run exits nonzero


def test_parser_rejects_unknown_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["dance"])
