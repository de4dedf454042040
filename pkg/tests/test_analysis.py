import pytest

from hri_sim.analysis import CostModel, cost_report, segment_phases, session_tokens
from hri_sim.harness import clarifier_policy, run_session, silent_policy
from hri_sim.sessionlog import SessionLog

REPLAY = "replay:@clarifier_corridor6"


def _tiles_exactly(phases, log):
    markers = log.tagged("step_marker")
    end = log.records[-1]["ts"]
    by_step = {}
    for p in phases:
        by_step.setdefault(p.step_id, []).append(p)
    for i, marker in enumerate(markers):
        step_start = marker["ts"]
        step_end = markers[i + 1]["ts"] if i + 1 < len(markers) else end
        ps = sorted(by_step.get(marker["step"], []), key=lambda p: p.start_ms)
        assert ps, f"step {marker['step']} has no phases"
        assert ps[0].start_ms == step_start
        assert ps[-1].end_ms == step_end
        for a, b in zip(ps, ps[1:]):
            assert a.end_ms == b.start_ms, "gap or overlap inside a step"


def test_silent_session_is_pure_execution():
    log = run_session("corridor6", "scripted", silent_policy(), "scripted", seed=0)
    phases = segment_phases(log)
    assert all(p.kind == "execution" for p in phases)
    assert len(phases) == 6
    _tiles_exactly(phases, log)


def test_clarifier_step_five_splits_into_dialog_then_execution():
    log = run_session("corridor6", "llm", clarifier_policy(), REPLAY, seed=0)
    phases = segment_phases(log)
    _tiles_exactly(phases, log)
    step_v = [p for p in phases if p.step_id == "V"]
    kinds = [p.kind for p in step_v]
    assert "dialog" in kinds
    dialog = next(p for p in step_v if p.kind == "dialog")
    phrase = log.tagged("phrase")[0]
    assert dialog.start_ms == phrase["start_ts"]
    # Dialog runs until the robot's reply (speech + pointing) has finished.
    reply_events = [r for r in log.tagged("action_event")
                    if r.get("turn") == 1 and "duration_ms" in r["body"]]
    expected_end = max(r["ts"] + r["body"]["duration_ms"] for r in reply_events)
    assert dialog.end_ms == expected_end


def test_aborted_mid_dialog_closes_phase_at_abort_time():
    # Synthetic log: a phrase turn with no reply, session aborted right after.
    log = SessionLog("s", "llm", 0)
    log.append("session_start", 0, scenario="x", steps=1, schema_version=1)
    log.append("step_marker", 0, step="I", instruction="Go.")
    log.append("phrase", 5000, text="hello?", source="user",
               start_ts=2000, end_ts=5000, turn=1)
    log.append("abort", 6000, reason="test")
    log.append("session_end", 6000, status="aborted")
    phases = segment_phases(log)
    assert [(p.kind, p.start_ms, p.end_ms) for p in phases] == [
        ("execution", 0, 2000), ("dialog", 2000, 5000), ("execution", 5000, 6000),
    ]


def test_session_tokens_sums_reasoning_records():
    log = SessionLog("s", "llm", 0)
    log.append("reasoning", 0, latency_ms=7, prompt_tokens=100,
               completion_tokens=20, cot="", program="", attempt=1, turn=1)
    log.append("reasoning", 1, latency_ms=3, prompt_tokens=50,
               completion_tokens=10, cot="", program="", attempt=1, turn=2)
    assert session_tokens(log) == (2, 150, 30, 10)


def _synthetic_log(condition, prompt, completion, wall=0):
    log = SessionLog(f"s-{condition}", condition, 0)
    log.append("session_start", 0, scenario="x", steps=1, schema_version=1)
    if prompt or completion:
        log.append("reasoning", 1, latency_ms=wall, prompt_tokens=prompt,
                   completion_tokens=completion, cot="", program="", attempt=1, turn=1)
    log.append("session_end", 2, status="completed")
    return log


def test_cost_report_flags_costlier_condition():
    report = cost_report([
        _synthetic_log("scripted", 0, 0),
        _synthetic_log("llm", 100, 50),
    ])
    by_name = {row.condition: row for row in report.per_condition}
    assert by_name["scripted"].cost == 0.0
    assert by_name["llm"].cost > 0.0
    assert report.costlier == "llm"


def test_cost_scales_linearly_in_completion_tokens():
    model = CostModel(per_prompt_token=0.0, per_completion_token=3.0,
                      per_wall_second=0.0)
    single = cost_report([_synthetic_log("llm", 10, 40)], model)
    double = cost_report([_synthetic_log("llm", 10, 80)], model)
    assert double.per_condition[0].cost == pytest.approx(
        2 * single.per_condition[0].cost)


def test_cost_tie_reports_no_costlier_condition():
    report = cost_report([
        _synthetic_log("scripted", 0, 0),
        _synthetic_log("llm", 0, 0),
    ])
    assert report.costlier is None


def test_cost_model_rejects_negative_weights():
    with pytest.raises(ValueError):
        CostModel(per_prompt_token=-1.0)


def test_cost_report_requires_logs():
    with pytest.raises(ValueError):
        cost_report([])
