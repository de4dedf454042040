"""A/B bench runner and report writers (metrics.csv, report.md).

Benches run a grid of (condition, policy, seed) sessions headlessly, write
one ndjson log per session, and aggregate phases, gaze metrics, and cost
into deterministic CSV and markdown artifacts.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from .analysis import CostModel, CostReport, Phase, cost_report, gaze_points_from_log, segment_phases
from .gaze_analysis import FixationClassifierConfig, PhaseGazeMetrics, classify_gaze, gaze_metrics
from .harness import UserPolicy, run_session
from .sessionlog import SessionLog

_CSV_COLUMNS = [
    "session_id", "condition", "policy", "seed", "step", "phase",
    "start_ms", "end_ms", "duration_s", "saccade_count",
    "mean_saccade_amplitude_deg", "std_saccade_amplitude_deg",
    "mean_saccade_velocity_dps", "std_saccade_velocity_dps",
    "mean_pupil_mm", "total_fixation_s",
]


@dataclass(frozen=True)
class BenchSession:
    log: SessionLog
    policy: str
    phases: tuple[Phase, ...]
    metrics: tuple[PhaseGazeMetrics, ...]


@dataclass(frozen=True)
class BenchResult:
    sessions: tuple[BenchSession, ...]
    cost: CostReport
    classifier: FixationClassifierConfig

    def logs(self) -> list[SessionLog]:
        return [s.log for s in self.sessions]


def analyze_log(log: SessionLog, policy: str,
                classifier: FixationClassifierConfig) -> BenchSession:
    phases = segment_phases(log)
    points = gaze_points_from_log(log)
    classification = classify_gaze(points, classifier)
    metrics = gaze_metrics(classification, phases, points)
    return BenchSession(log, policy, tuple(phases), tuple(metrics))


def run_bench(
    scenario_source,
    sessions: int,
    policies: list[UserPolicy],
    conditions: list[str],
    backend_spec: str,
    cost_model: CostModel | None = None,
    classifier: FixationClassifierConfig | None = None,
    out_dir: str | Path | None = None,
) -> BenchResult:
    """Run the (condition x policy x seed) grid and aggregate the results."""
    classifier = classifier or FixationClassifierConfig()
    results: list[BenchSession] = []
    for condition in conditions:
        spec = "scripted" if condition == "scripted" else backend_spec
        for policy in policies:
            for seed in range(sessions):
                log = run_session(scenario_source, condition, policy, spec, seed=seed)
                results.append(analyze_log(log, policy.kind, classifier))
    report = cost_report([s.log for s in results], cost_model)
    bench = BenchResult(tuple(results), report, classifier)
    if out_dir is not None:
        write_outputs(bench, Path(out_dir))
    return bench


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def metrics_csv(bench: BenchResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for session in bench.sessions:
        for m in session.metrics:
            writer.writerow([
                session.log.session_id, session.log.condition, session.policy,
                session.log.seed, m.step_id, m.phase, m.start_ms, m.end_ms,
                _fmt(m.interval_duration_s), m.saccade_count,
                _fmt(m.mean_saccade_amplitude_deg), _fmt(m.std_saccade_amplitude_deg),
                _fmt(m.mean_saccade_velocity_dps), _fmt(m.std_saccade_velocity_dps),
                _fmt(m.mean_pupil_mm), _fmt(m.total_fixation_s),
            ])
    return buffer.getvalue()


def report_markdown(bench: BenchResult) -> str:
    lines = [
        "# Bench report",
        "",
        f"Gaze classifier: I-VT, velocity threshold "
        f"{bench.classifier.velocity_threshold_dps:g} deg/s "
        f"(interpreted as degrees per second), "
        f"minimum fixation {bench.classifier.min_fixation_ms} ms.",
        "",
        "## Sessions",
        "",
        "| session | condition | policy | status | steps completed | phrases |",
        "|---|---|---|---|---|---|",
    ]
    for session in bench.sessions:
        log = session.log
        status = log.records[-1].get("status", "?")
        steps_done = len(log.tagged("step_complete"))
        phrases = len(log.tagged("phrase"))
        lines.append(
            f"| {log.session_id} | {log.condition} | {session.policy} "
            f"| {status} | {steps_done} | {phrases} |"
        )
    lines += [
        "",
        "## Cost by condition",
        "",
        "| condition | sessions | calls | prompt tokens | completion tokens "
        "| backend wall (ms) | weighted cost |",
        "|---|---|---|---|---|---|---|",
    ]
    for row in bench.cost.per_condition:
        lines.append(
            f"| {row.condition} | {row.sessions} | {row.reasoning_calls} "
            f"| {row.prompt_tokens} | {row.completion_tokens} "
            f"| {row.backend_wall_ms} | {row.cost:.3f} |"
        )
    lines.append("")
    if bench.cost.costlier is not None:
        lines.append(f"Costlier condition: **{bench.cost.costlier}**.")
    else:
        lines.append("Costlier condition: none (tied).")
    lines.append("")
    return "\n".join(lines)


def write_outputs(bench: BenchResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    logs_dir = out_dir / "logs"
    for session in bench.sessions:
        session.log.write(logs_dir / f"{session.log.session_id}.ndjson")
    (out_dir / "metrics.csv").write_text(metrics_csv(bench), "utf-8")
    (out_dir / "report.md").write_text(report_markdown(bench), "utf-8")
