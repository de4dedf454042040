"""Simulated perception: object detections, templated scene captions, gaze mapping.

Detections stand in for a camera-based detector: presence is randomized by a
distance-dependent miss curve, but reported positions are ground truth (the
RGB-D abstraction).  Captions come from a fixed template.  Gaze resolution
projects objects into the user's head camera as discs and matches the gaze
point against them.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass

from .geometry import (
    CameraModel,
    PixelPoint,
    Vec3,
    angle_between_deg,
    project,
    projected_radius_px,
    ray_through_normalized,
)
from .world import WorldState

THETA_MAX_DEG = 3.0


@dataclass(frozen=True)
class NoiseConfig:
    enabled: bool = True
    miss_per_meter: float = 0.08   # slope of the miss curve
    miss_onset_m: float = 2.0      # distance where misses start
    miss_cap: float = 0.95

    def miss_probability(self, distance_m: float) -> float:
        if not self.enabled:
            return 0.0
        return min(max(self.miss_per_meter * (distance_m - self.miss_onset_m), 0.0), self.miss_cap)


NOISE_OFF = NoiseConfig(enabled=False)


@dataclass(frozen=True)
class Detection:
    object_id: str | None
    category: str
    confidence: float
    bbox: tuple[float, float, float, float]  # x0, y0, x1, y1 in pixels
    world_pos: Vec3

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError("confidence must be in [0, 1]")


def _draw_rng(seed: int, camera_id: str, clock_ms: int) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{camera_id}:{clock_ms}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def visible_objects(camera: CameraModel, world: WorldState):
    """Objects whose center projects inside the camera frustum, in id order."""
    out = []
    for obj in sorted(world.objects, key=lambda o: o.id):
        pixel = project(camera, obj.position)
        if pixel is not None:
            out.append((obj, pixel))
    return out


def render_detections(
    camera: CameraModel,
    world: WorldState,
    noise: NoiseConfig = NoiseConfig(),
    seed: int = 0,
) -> list[Detection]:
    """Detections for every frustum-visible object, thinned by the miss curve.

    The draw is deterministic in (seed, camera id, world clock); reported
    positions are always the true object positions.
    """
    if world.find_camera(camera.id) is None and camera.id != world.user.head_camera.id:
        raise ValueError(f"camera {camera.id!r} does not belong to this world")
    rng = _draw_rng(seed, camera.id, world.clock_ms)
    detections: list[Detection] = []
    for obj, pixel in visible_objects(camera, world):
        distance = (obj.position - camera.position).norm()
        miss = noise.miss_probability(distance)
        if rng.random() < miss:
            continue
        radius_px = projected_radius_px(camera, obj.position, obj.radius) or 0.0
        bbox = (
            min(max(pixel.u - radius_px, 0.0), camera.width),
            min(max(pixel.v - radius_px, 0.0), camera.height),
            min(max(pixel.u + radius_px, 0.0), camera.width),
            min(max(pixel.v + radius_px, 0.0), camera.height),
        )
        detections.append(Detection(obj.id, obj.category, 1.0 - miss, bbox, obj.position))
    return detections


# --- captions ----------------------------------------------------------------

def caption(world: WorldState, camera: CameraModel) -> str:
    """Fixed-template scene caption for the given camera view."""
    visible = [obj for obj, _ in visible_objects(camera, world)]
    if not visible:
        return "A room with 0 objects."
    counts: dict[str, int] = {}
    for obj in visible:
        counts[obj.category] = counts.get(obj.category, 0) + 1
    parts = [
        cat if n == 1 else f"{cat} x{n}"
        for cat, n in sorted(counts.items())
    ]
    return (
        f"A room with {len(visible)} objects: {', '.join(parts)}; "
        f"a person is {_person_state(world)}."
    )


def _person_state(world: WorldState) -> str:
    held = world.user.held_object
    if held is not None:
        obj = world.find_object(held)
        return f"holding {obj.category if obj else held}"
    for zone in world.zones:
        if world.user.position.horizontal_distance(zone.center) <= zone.radius:
            return f"near {zone.id}"
    return "standing"


# --- gaze resolution ----------------------------------------------------------

@dataclass(frozen=True)
class GazeSample:
    timestamp_ms: int
    point: tuple[float, float]  # normalized image coordinates, v down
    valid: bool = True
    pupil_diameter_mm: float | None = None

    def __post_init__(self) -> None:
        if self.valid:
            gx, gy = self.point
            if not (0.0 <= gx <= 1.0 and 0.0 <= gy <= 1.0):
                raise ValueError("valid gaze points must lie in [0,1]^2")


@dataclass(frozen=True)
class GazeTarget:
    object_id: str | None = None
    category: str | None = None
    dwell_ms: int = 0

    def __post_init__(self) -> None:
        if (self.object_id is None) != (self.category is None):
            raise ValueError("object_id and category must be set together")
        if self.dwell_ms < 0:
            raise ValueError("dwell_ms must be >= 0")


EMPTY_GAZE = GazeTarget()


def gaze_hit(sample: GazeSample, world: WorldState) -> tuple[str, str] | None:
    """(object id, category) the gaze point lands on, or None.

    Objects project into the head camera as discs.  A disc containing the
    gaze point wins; among several, the smallest angular distance between
    the gaze ray and the object-center ray decides.  With no containing
    disc, the angularly nearest object within the threshold wins.
    """
    if not sample.valid:
        return None
    camera = world.user.head_camera
    gx, gy = sample.point
    gaze_px = PixelPoint(gx * camera.width, gy * camera.height)
    gaze_ray = ray_through_normalized(camera, gx, gy)

    containing: list[tuple[float, str, str]] = []
    near: list[tuple[float, str, str]] = []
    for obj in world.objects:
        center_px = project(camera, obj.position)
        if center_px is None:
            continue
        radius_px = projected_radius_px(camera, obj.position, obj.radius) or 0.0
        angular = angle_between_deg(gaze_ray, (obj.position - camera.position))
        dist_px = math.hypot(gaze_px.u - center_px.u, gaze_px.v - center_px.v)
        if dist_px <= radius_px:
            containing.append((angular, obj.id, obj.category))
        elif angular <= THETA_MAX_DEG:
            near.append((angular, obj.id, obj.category))
    pool = containing or near
    if not pool:
        return None
    _, obj_id, category = min(pool)
    return obj_id, category


class GazeTracker:
    """Accumulates dwell time while the resolved target id stays unchanged."""

    def __init__(self) -> None:
        self._target_id: str | None = None
        self._category: str | None = None
        self._streak_start_ms: int | None = None
        self._last_ms: int | None = None

    def resolve(self, sample: GazeSample, world: WorldState) -> GazeTarget:
        hit = gaze_hit(sample, world)
        obj_id, category = hit if hit is not None else (None, None)
        if self._streak_start_ms is None or obj_id != self._target_id:
            self._streak_start_ms = sample.timestamp_ms
        self._target_id, self._category = obj_id, category
        self._last_ms = sample.timestamp_ms
        return self.current()

    def current(self) -> GazeTarget:
        if self._target_id is None or self._last_ms is None or self._streak_start_ms is None:
            return EMPTY_GAZE
        return GazeTarget(self._target_id, self._category, self._last_ms - self._streak_start_ms)
