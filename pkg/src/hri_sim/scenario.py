"""Scenario documents: schema validation, step specs, and completion predicates.

A scenario file is a JSON document with top-level keys `name`, `corridor`,
`objects`, `zones`, `cameras`, `user`, and `steps`.  Validation errors name
the offending field by path (e.g. ``objects[2].radius``).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .geometry import CameraModel, Vec3
from .textutil import split_sentences
from .world import UserAvatar, WorldObject, WorldState, Zone, head_camera_for

_ROMAN = re.compile(r"^[IVXLCDM]+$")


class ScenarioError(ValueError):
    """Raised when a scenario document violates the schema."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


# --- completion predicates ----------------------------------------------------

@dataclass(frozen=True)
class UserInZone:
    zone: str
    radius: float


@dataclass(frozen=True)
class ObjectInZone:
    object: str
    zones: tuple[str, ...]


@dataclass(frozen=True)
class ObjectHeld:
    object: str


CompletionPredicate = UserInZone | ObjectInZone | ObjectHeld


def step_complete(predicate: CompletionPredicate, world: WorldState) -> bool:
    if isinstance(predicate, UserInZone):
        zone = world.find_zone(predicate.zone)
        return zone is not None and (
            world.user.position.horizontal_distance(zone.center) <= predicate.radius
        )
    if isinstance(predicate, ObjectInZone):
        obj = world.find_object(predicate.object)
        if obj is None or world.user.held_object == predicate.object:
            return False
        for zone_id in predicate.zones:
            zone = world.find_zone(zone_id)
            if zone is not None and (obj.position - zone.center).norm() <= zone.radius:
                return True
        return False
    if isinstance(predicate, ObjectHeld):
        return world.user.held_object == predicate.object
    return False


@dataclass(frozen=True)
class StepSpec:
    id: str
    instruction_text: str
    completion: CompletionPredicate
    pointing_target: str | None = None
    ambiguity_note: str | None = None


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    corridor_width: float
    corridor_length: float
    steps: tuple[StepSpec, ...]
    initial_world: WorldState


# --- document parsing ----------------------------------------------------------

def _require(doc: dict, field: str, key: str, kind, path: str):
    if key not in doc:
        raise ScenarioError(f"{field}.{key}" if field else key, "missing required field")
    value = doc[key]
    where = f"{field}.{key}" if field else key
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ScenarioError(where, f"expected a number, got {type(value).__name__}")
        return float(value)
    if not isinstance(value, kind):
        raise ScenarioError(where, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _vec3(raw, field: str) -> Vec3:
    if not isinstance(raw, list) or len(raw) != 3:
        raise ScenarioError(field, "expected [x, y, z]")
    for c in raw:
        if not isinstance(c, (int, float)) or isinstance(c, bool):
            raise ScenarioError(field, "coordinates must be numbers")
    return Vec3(float(raw[0]), float(raw[1]), float(raw[2]))


def _camera(raw: dict, field: str, default_id: str | None = None) -> CameraModel:
    cam_id = raw.get("id", default_id)
    if not isinstance(cam_id, str) or not cam_id:
        raise ScenarioError(f"{field}.id", "camera id must be a non-empty string")
    position = _vec3(raw.get("position", [0.0, 0.0, 0.0]), f"{field}.position")
    try:
        return CameraModel(
            id=cam_id,
            position=position,
            yaw_deg=_require(raw, field, "yaw", float, field) if "yaw" in raw else 0.0,
            pitch_deg=float(raw.get("pitch", 0.0)),
            h_fov_deg=_require(raw, field, "h_fov", float, field),
            v_fov_deg=_require(raw, field, "v_fov", float, field),
            width=_require(raw, field, "width", int, field),
            height=_require(raw, field, "height", int, field),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(field, str(exc)) from exc


def _completion(raw, field: str, object_ids: set[str], zone_ids: set[str]) -> CompletionPredicate:
    if not isinstance(raw, dict):
        raise ScenarioError(field, "expected a completion object")
    kind = raw.get("kind")
    if kind == "user_in_zone":
        zone = _require(raw, field, "zone", str, field)
        radius = _require(raw, field, "radius", float, field)
        if zone not in zone_ids:
            raise ScenarioError(f"{field}.zone", f"unknown zone {zone!r}")
        if radius <= 0:
            raise ScenarioError(f"{field}.radius", "must be > 0")
        return UserInZone(zone, radius)
    if kind == "object_in_zone":
        obj = _require(raw, field, "object", str, field)
        zones = _require(raw, field, "zones", list, field)
        if obj not in object_ids:
            raise ScenarioError(f"{field}.object", f"unknown object {obj!r}")
        if not zones:
            raise ScenarioError(f"{field}.zones", "must name at least one zone")
        for i, z in enumerate(zones):
            if z not in zone_ids:
                raise ScenarioError(f"{field}.zones[{i}]", f"unknown zone {z!r}")
        return ObjectInZone(obj, tuple(zones))
    if kind == "object_held":
        obj = _require(raw, field, "object", str, field)
        if obj not in object_ids:
            raise ScenarioError(f"{field}.object", f"unknown object {obj!r}")
        return ObjectHeld(obj)
    raise ScenarioError(f"{field}.kind", f"unknown completion kind {kind!r}")


def parse_scenario(doc: dict) -> tuple[WorldState, ScenarioSpec]:
    name = _require(doc, "", "name", str, "")
    corridor = _require(doc, "", "corridor", dict, "")
    width = _require(corridor, "corridor", "width", float, "corridor")
    length = _require(corridor, "corridor", "length", float, "corridor")
    if width <= 0 or length <= 0:
        raise ScenarioError("corridor", "width and length must be > 0")

    objects: list[WorldObject] = []
    for i, raw in enumerate(_require(doc, "", "objects", list, "")):
        field = f"objects[{i}]"
        try:
            objects.append(WorldObject(
                id=_require(raw, field, "id", str, field),
                category=_require(raw, field, "category", str, field),
                position=_vec3(raw.get("position"), f"{field}.position"),
                radius=_require(raw, field, "radius", float, field),
                movable=bool(raw.get("movable", False)),
                color=raw.get("color"),
            ))
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"{field}.radius", str(exc)) from exc
    object_ids = {o.id for o in objects}
    if len(object_ids) != len(objects):
        raise ScenarioError("objects", "object ids must be unique")

    zones: list[Zone] = []
    for i, raw in enumerate(_require(doc, "", "zones", list, "")):
        field = f"zones[{i}]"
        try:
            zones.append(Zone(
                id=_require(raw, field, "id", str, field),
                center=_vec3(raw.get("center"), f"{field}.center"),
                radius=_require(raw, field, "radius", float, field),
                kind=_require(raw, field, "kind", str, field),
            ))
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(field, str(exc)) from exc
    zone_ids = {z.id for z in zones}

    cameras = [
        _camera(raw, f"cameras[{i}]")
        for i, raw in enumerate(_require(doc, "", "cameras", list, ""))
    ]

    user_raw = _require(doc, "", "user", dict, "")
    user_pos = _vec3(user_raw.get("position"), "user.position")
    heading = float(user_raw.get("heading", 0.0))
    head_template = _camera(
        _require(user_raw, "user", "head_camera", dict, "user"),
        "user.head_camera", default_id="head_cam",
    )

    steps_raw = _require(doc, "", "steps", list, "")
    if not steps_raw:
        raise ScenarioError("steps", "a scenario must define at least one step")
    steps: list[StepSpec] = []
    target_ids = object_ids | zone_ids
    for i, raw in enumerate(steps_raw):
        field = f"steps[{i}]"
        step_id = _require(raw, field, "id", str, field)
        if not _ROMAN.match(step_id):
            raise ScenarioError(f"{field}.id", f"step id must be a roman numeral, got {step_id!r}")
        instruction = _require(raw, field, "instruction", str, field)
        if len(split_sentences(instruction)) > 2:
            raise ScenarioError(f"{field}.instruction", "instructions are limited to two sentences")
        pointing = raw.get("pointing_target")
        if pointing is not None and pointing not in target_ids:
            raise ScenarioError(f"{field}.pointing_target", f"unknown id {pointing!r}")
        steps.append(StepSpec(
            id=step_id,
            instruction_text=instruction,
            completion=_completion(raw.get("completion"), f"{field}.completion",
                                   object_ids, zone_ids),
            pointing_target=pointing,
            ambiguity_note=raw.get("ambiguity_note"),
        ))

    user = UserAvatar(
        position=user_pos,
        heading_deg=heading,
        head_camera=head_camera_for(user_pos, heading, head_template),
    )
    world = WorldState(
        objects=tuple(objects),
        zones=tuple(zones),
        cameras=tuple(cameras),
        user=user,
        corridor_width=width,
        corridor_length=length,
    )
    spec = ScenarioSpec(
        name=name,
        corridor_width=width,
        corridor_length=length,
        steps=tuple(steps),
        initial_world=world,
    )
    return world, spec


def load_scenario(source: str | Path) -> tuple[WorldState, ScenarioSpec]:
    """Load a scenario by bundled name (e.g. ``corridor6``) or file path."""
    path = Path(source)
    if not path.suffix and not path.exists():
        text = resources.files("hri_sim").joinpath(f"scenarios/{source}.json").read_text("utf-8")
    else:
        text = path.read_text("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("document", f"not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("document", "top level must be an object")
    return parse_scenario(doc)
