"""Session-log analysis: phase segmentation, gaze extraction, cost accounting.

A step's timeline splits into dialog phases (from the first word of a user
phrase until the robot's reply has finished) and execution phases (all the
rest).  The two phase kinds tile each step interval exactly, with no gaps
and no overlaps.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gaze_analysis import GazePoint, HeadPose, resolve_directions
from .geometry import CameraModel, Vec3
from .perception import GazeSample
from .sessionlog import SessionLog


@dataclass(frozen=True)
class Phase:
    step_id: str
    kind: str  # dialog | execution
    start_ms: int
    end_ms: int

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


def _merge_intervals(intervals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def _step_intervals(log: SessionLog) -> list[tuple[str, int, int]]:
    markers = log.tagged("step_marker")
    if not markers:
        return []
    end_ts = log.records[-1]["ts"]
    out: list[tuple[str, int, int]] = []
    for i, marker in enumerate(markers):
        stop = markers[i + 1]["ts"] if i + 1 < len(markers) else end_ts
        out.append((marker["step"], marker["ts"], stop))
    return out


def _turn_spans(log: SessionLog) -> list[tuple[int, int]]:
    """[phrase start, end of the robot's reply] for every phrase turn."""
    spans: dict[int, tuple[int, int]] = {}
    for record in log.records:
        turn = record.get("turn")
        if turn is None:
            continue
        if record["tag"] == "phrase":
            spans[turn] = (record["start_ts"], record["end_ts"])
        elif turn in spans:
            end = record["ts"]
            if record["tag"] == "action_event":
                end += int(record["body"].get("duration_ms", 0))
            start, old_end = spans[turn]
            spans[turn] = (start, max(old_end, end))
    return list(spans.values())


def segment_phases(log: SessionLog) -> list[Phase]:
    """Dialog/execution tiling per step; steps without questions are pure execution."""
    phases: list[Phase] = []
    turns = _turn_spans(log)
    for step_id, step_start, step_end in _step_intervals(log):
        if step_end <= step_start:
            continue
        clipped = [
            (max(start, step_start), min(end, step_end))
            for start, end in turns
            if start < step_end and end > step_start
        ]
        dialog = [(s, e) for s, e in _merge_intervals(clipped) if e > s]
        cursor = step_start
        for start, end in dialog:
            if start > cursor:
                phases.append(Phase(step_id, "execution", cursor, start))
            phases.append(Phase(step_id, "dialog", start, end))
            cursor = end
        if cursor < step_end:
            phases.append(Phase(step_id, "execution", cursor, step_end))
    return phases


# --- gaze extraction ---------------------------------------------------------------

def gaze_points_from_log(log: SessionLog) -> list[GazePoint]:
    """Rebuild world-frame gaze directions from logged samples and head poses."""
    start = next((r for r in log.records if r["tag"] == "session_start"), None)
    if start is None or "head_camera" not in start:
        return []
    cam = start["head_camera"]
    template = CameraModel(
        id="head_cam", position=Vec3(0.0, 0.0, 0.0), yaw_deg=0.0, pitch_deg=0.0,
        h_fov_deg=cam["h_fov"], v_fov_deg=cam["v_fov"],
        width=cam["width"], height=cam["height"],
    )
    samples: list[GazeSample] = []
    poses: list[HeadPose] = []
    for record in log.tagged("gaze_sample"):
        samples.append(GazeSample(
            timestamp_ms=record["ts"],
            point=tuple(record["point"]),
            valid=record["valid"],
            pupil_diameter_mm=record.get("pupil_mm"),
        ))
        head = record["head"]
        poses.append(HeadPose(
            position=Vec3(*head["pos"]), yaw_deg=head["yaw"], pitch_deg=head["pitch"],
        ))
    return resolve_directions(samples, poses, template)


# --- cost accounting ----------------------------------------------------------------

@dataclass(frozen=True)
class CostModel:
    per_prompt_token: float = 1.0
    per_completion_token: float = 2.0
    per_wall_second: float = 0.5

    def __post_init__(self) -> None:
        if min(self.per_prompt_token, self.per_completion_token, self.per_wall_second) < 0:
            raise ValueError("cost weights must be nonnegative")


@dataclass(frozen=True)
class ConditionCost:
    condition: str
    sessions: int
    reasoning_calls: int
    prompt_tokens: int
    completion_tokens: int
    backend_wall_ms: int
    cost: float


@dataclass(frozen=True)
class CostReport:
    per_condition: tuple[ConditionCost, ...]
    costlier: str | None  # condition name, or None when tied


def session_tokens(log: SessionLog) -> tuple[int, int, int, int]:
    """(calls, prompt tokens, completion tokens, wall ms) for one session."""
    calls = prompt = completion = wall = 0
    for record in log.tagged("reasoning"):
        calls += 1
        prompt += record["prompt_tokens"]
        completion += record["completion_tokens"]
        wall += record["latency_ms"]
    return calls, prompt, completion, wall


def cost_report(logs: list[SessionLog], model: CostModel | None = None) -> CostReport:
    model = model or CostModel()
    grouped: dict[str, list[SessionLog]] = {}
    for log in logs:
        grouped.setdefault(log.condition, []).append(log)
    if not grouped:
        raise ValueError("cost_report requires at least one session log")
    rows: list[ConditionCost] = []
    for condition in sorted(grouped):
        calls = prompt = completion = wall = 0
        for log in grouped[condition]:
            c, p, t, w = session_tokens(log)
            calls += c
            prompt += p
            completion += t
            wall += w
        cost = (prompt * model.per_prompt_token
                + completion * model.per_completion_token
                + wall / 1000.0 * model.per_wall_second)
        rows.append(ConditionCost(condition, len(grouped[condition]), calls,
                                  prompt, completion, wall, cost))
    costlier: str | None = None
    if len(rows) > 1:
        top = max(rows, key=lambda r: r.cost)
        if sum(1 for r in rows if r.cost == top.cost) == 1:
            costlier = top.condition
    return CostReport(tuple(rows), costlier)
