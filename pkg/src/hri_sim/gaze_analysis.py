"""Velocity-threshold (I-VT) gaze classification and per-phase gaze metrics.

Each inter-sample interval gets an angular velocity from the world-frame
gaze directions; intervals above the threshold are saccade samples, the
rest are fixation samples.  Contiguous fixation intervals merge into
fixations, short fixations are discarded, and saccades are measured
between the centroids of the surviving fixations that bound them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import fmean, pstdev

from .geometry import CameraModel, Vec3, angle_between_deg, ray_through_normalized
from .perception import GazeSample


@dataclass(frozen=True)
class FixationClassifierConfig:
    velocity_threshold_dps: float = 100.0
    min_fixation_ms: int = 60

    def __post_init__(self) -> None:
        if self.velocity_threshold_dps <= 0:
            raise ValueError("velocity threshold must be > 0")


@dataclass(frozen=True)
class HeadPose:
    position: Vec3
    yaw_deg: float
    pitch_deg: float


@dataclass(frozen=True)
class GazePoint:
    """One valid gaze sample resolved to a world-frame direction."""
    timestamp_ms: int
    direction: Vec3
    pupil_mm: float | None = None


@dataclass(frozen=True)
class IntervalLabel:
    start_ms: int
    end_ms: int
    velocity_dps: float
    label: str  # fixation | saccade


@dataclass(frozen=True)
class Fixation:
    start_ms: int
    end_ms: int
    centroid: Vec3

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


@dataclass(frozen=True)
class Saccade:
    start_ms: int
    end_ms: int
    amplitude_deg: float
    velocity_dps: float


@dataclass(frozen=True)
class GazeClassification:
    intervals: tuple[IntervalLabel, ...]
    fixations: tuple[Fixation, ...]
    saccades: tuple[Saccade, ...]


EMPTY_CLASSIFICATION = GazeClassification((), (), ())


def resolve_directions(
    samples: list[GazeSample],
    poses: list[HeadPose],
    camera_template: CameraModel,
) -> list[GazePoint]:
    """Turn valid samples plus head poses into world-frame gaze directions.

    Invalid samples and duplicate timestamps are dropped; the sample and
    pose lists must be index-aligned.
    """
    if len(samples) != len(poses):
        raise ValueError("samples and head poses must align one-to-one")
    points: list[GazePoint] = []
    for sample, pose in zip(samples, poses):
        if not sample.valid:
            continue
        if points and sample.timestamp_ms <= points[-1].timestamp_ms:
            continue
        camera = CameraModel(
            id=camera_template.id,
            position=pose.position,
            yaw_deg=pose.yaw_deg,
            pitch_deg=pose.pitch_deg,
            h_fov_deg=camera_template.h_fov_deg,
            v_fov_deg=camera_template.v_fov_deg,
            width=camera_template.width,
            height=camera_template.height,
        )
        direction = ray_through_normalized(camera, sample.point[0], sample.point[1])
        points.append(GazePoint(sample.timestamp_ms, direction, sample.pupil_diameter_mm))
    return points


def interval_velocity_dps(a: GazePoint, b: GazePoint) -> float:
    dt_s = (b.timestamp_ms - a.timestamp_ms) / 1000.0
    return angle_between_deg(a.direction, b.direction) / dt_s


def _centroid(points: list[GazePoint]) -> Vec3:
    x = fmean(p.direction.x for p in points)
    y = fmean(p.direction.y for p in points)
    z = fmean(p.direction.z for p in points)
    n = math.sqrt(x * x + y * y + z * z)
    if n == 0.0:
        return points[0].direction
    return Vec3(x / n, y / n, z / n)


def classify_gaze(
    points: list[GazePoint],
    config: FixationClassifierConfig | None = None,
) -> GazeClassification:
    """I-VT classification over prepared gaze points (time-ordered)."""
    config = config or FixationClassifierConfig()
    if len(points) < 2:
        return EMPTY_CLASSIFICATION

    intervals: list[IntervalLabel] = []
    for a, b in zip(points, points[1:]):
        velocity = interval_velocity_dps(a, b)
        label = "saccade" if velocity > config.velocity_threshold_dps else "fixation"
        intervals.append(IntervalLabel(a.timestamp_ms, b.timestamp_ms, velocity, label))

    # Merge contiguous fixation intervals into fixations.
    fixations: list[Fixation] = []
    run_start: int | None = None
    for i, interval in enumerate(intervals):
        if interval.label == "fixation":
            if run_start is None:
                run_start = i
            continue
        if run_start is not None:
            fixations.append(_fixation_from_run(points, intervals, run_start, i - 1))
            run_start = None
    if run_start is not None:
        fixations.append(_fixation_from_run(points, intervals, run_start, len(intervals) - 1))

    fixations = [f for f in fixations if f.duration_ms >= config.min_fixation_ms]

    # Saccades join consecutive surviving fixations.
    saccades: list[Saccade] = []
    for prev, nxt in zip(fixations, fixations[1:]):
        duration_ms = nxt.start_ms - prev.end_ms
        if duration_ms <= 0:
            continue
        amplitude = angle_between_deg(prev.centroid, nxt.centroid)
        saccades.append(Saccade(
            start_ms=prev.end_ms,
            end_ms=nxt.start_ms,
            amplitude_deg=amplitude,
            velocity_dps=amplitude / (duration_ms / 1000.0),
        ))
    return GazeClassification(tuple(intervals), tuple(fixations), tuple(saccades))


def _fixation_from_run(points, intervals, first: int, last: int) -> Fixation:
    involved = points[first:last + 2]
    return Fixation(
        start_ms=intervals[first].start_ms,
        end_ms=intervals[last].end_ms,
        centroid=_centroid(involved),
    )


# --- per-phase metrics ------------------------------------------------------------

@dataclass(frozen=True)
class PhaseGazeMetrics:
    step_id: str
    phase: str
    start_ms: int
    end_ms: int
    saccade_count: int
    mean_saccade_amplitude_deg: float | None
    std_saccade_amplitude_deg: float | None
    mean_saccade_velocity_dps: float | None
    std_saccade_velocity_dps: float | None
    mean_pupil_mm: float | None
    interval_duration_s: float
    total_fixation_s: float


def _overlap_ms(a0: int, a1: int, b0: int, b1: int) -> int:
    return max(0, min(a1, b1) - max(a0, b0))


def _mean_std(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    return fmean(values), (pstdev(values) if len(values) > 1 else 0.0)


def gaze_metrics(
    classification: GazeClassification,
    phases,
    points: list[GazePoint] | None = None,
) -> list[PhaseGazeMetrics]:
    """Per-phase saccade, fixation, and pupil summaries (absent when empty)."""
    out: list[PhaseGazeMetrics] = []
    for phase in phases:
        in_phase = [
            s for s in classification.saccades
            if phase.start_ms <= (s.start_ms + s.end_ms) // 2 < phase.end_ms
        ]
        amp_mean, amp_std = _mean_std([s.amplitude_deg for s in in_phase])
        vel_mean, vel_std = _mean_std([s.velocity_dps for s in in_phase])
        pupil = None
        if points:
            values = [
                p.pupil_mm for p in points
                if p.pupil_mm is not None and phase.start_ms <= p.timestamp_ms < phase.end_ms
            ]
            pupil = fmean(values) if values else None
        fixation_ms = sum(
            _overlap_ms(f.start_ms, f.end_ms, phase.start_ms, phase.end_ms)
            for f in classification.fixations
        )
        out.append(PhaseGazeMetrics(
            step_id=phase.step_id,
            phase=phase.kind,
            start_ms=phase.start_ms,
            end_ms=phase.end_ms,
            saccade_count=len(in_phase),
            mean_saccade_amplitude_deg=amp_mean,
            std_saccade_amplitude_deg=amp_std,
            mean_saccade_velocity_dps=vel_mean,
            std_saccade_velocity_dps=vel_std,
            mean_pupil_mm=pupil,
            interval_duration_s=(phase.end_ms - phase.start_ms) / 1000.0,
            total_fixation_s=fixation_ms / 1000.0,
        ))
    return out
