"""Immutable simulated world: objects, zones, the user avatar, and user actions.

WorldState values are frozen; every mutation returns a fresh state plus a
WorldEvent describing what happened (or why it was rejected).  All mutation
happens on the single loop thread, so snapshots can be handed to any
consumer without copying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .geometry import CameraModel, Vec3

REACH_RADIUS_M = 1.2
EYE_HEIGHT_M = 1.6


@dataclass(frozen=True)
class WorldObject:
    id: str
    category: str
    position: Vec3
    radius: float
    movable: bool = False
    color: str | None = None

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError(f"object {self.id!r}: radius must be > 0")


@dataclass(frozen=True)
class Zone:
    id: str
    center: Vec3
    radius: float
    kind: str  # container | floor_region | fork

    _KINDS = ("container", "floor_region", "fork")

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError(f"zone {self.id!r}: radius must be > 0")
        if self.kind not in self._KINDS:
            raise ValueError(f"zone {self.id!r}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class UserAvatar:
    position: Vec3
    heading_deg: float
    head_camera: CameraModel
    held_object: str | None = None


@dataclass(frozen=True)
class WorldState:
    objects: tuple[WorldObject, ...]
    zones: tuple[Zone, ...]
    cameras: tuple[CameraModel, ...]
    user: UserAvatar
    corridor_width: float   # extent along y, meters
    corridor_length: float  # extent along x, meters
    clock_ms: int = 0

    def __post_init__(self) -> None:
        ids = [o.id for o in self.objects]
        if len(ids) != len(set(ids)):
            raise ValueError("object ids must be unique within a WorldState")
        held = self.user.held_object
        if held is not None:
            obj = self.find_object(held)
            if obj is None or not obj.movable:
                raise ValueError(f"held_object {held!r} must reference an existing movable object")

    def find_object(self, object_id: str) -> WorldObject | None:
        for o in self.objects:
            if o.id == object_id:
                return o
        return None

    def find_zone(self, zone_id: str) -> Zone | None:
        for z in self.zones:
            if z.id == zone_id:
                return z
        return None

    def find_camera(self, camera_id: str) -> CameraModel | None:
        for c in self.cameras:
            if c.id == camera_id:
                return c
        return None

    def at_clock(self, clock_ms: int) -> WorldState:
        if clock_ms < self.clock_ms:
            raise ValueError("clock must be monotonically non-decreasing")
        return replace(self, clock_ms=clock_ms)


def head_camera_for(position: Vec3, heading_deg: float, template: CameraModel) -> CameraModel:
    """Head camera rigidly attached to the avatar: eye height, yaw from heading."""
    return replace(
        template,
        position=Vec3(position.x, position.y, position.z + EYE_HEIGHT_M),
        yaw_deg=heading_deg,
    )


# --- user actions -----------------------------------------------------------

@dataclass(frozen=True)
class MoveTo:
    target: Vec3


@dataclass(frozen=True)
class Pick:
    object_id: str


@dataclass(frozen=True)
class Place:
    zone_id: str


UserAction = MoveTo | Pick | Place


@dataclass(frozen=True)
class WorldEvent:
    kind: str  # moved | picked | placed | rejected
    detail: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.kind != "rejected"


def _rejected(reason: str) -> WorldEvent:
    return WorldEvent("rejected", {"reason": reason})


def apply_user_action(world: WorldState, action: UserAction) -> tuple[WorldState, WorldEvent]:
    """Apply a user action; rejected actions leave the world unchanged."""
    if isinstance(action, MoveTo):
        return _apply_move(world, action.target)
    if isinstance(action, Pick):
        return _apply_pick(world, action.object_id)
    if isinstance(action, Place):
        return _apply_place(world, action.zone_id)
    return world, _rejected(f"unknown action {action!r}")


def _apply_move(world: WorldState, target: Vec3) -> tuple[WorldState, WorldEvent]:
    clamped = Vec3(
        min(max(target.x, 0.0), world.corridor_length),
        min(max(target.y, 0.0), world.corridor_width),
        0.0,
    )
    old = world.user.position
    dx, dy = clamped.x - old.x, clamped.y - old.y
    heading = world.user.heading_deg
    if math.hypot(dx, dy) > 1e-9:
        heading = math.degrees(math.atan2(dy, dx))
    user = replace(
        world.user,
        position=clamped,
        heading_deg=heading,
        head_camera=head_camera_for(clamped, heading, world.user.head_camera),
    )
    new_world = replace(world, user=user)
    # A held object travels with the avatar.
    if user.held_object is not None:
        new_world = _with_object_at(new_world, user.held_object, _carry_position(clamped))
    event = WorldEvent("moved", {"x": clamped.x, "y": clamped.y,
                                 "clamped": clamped != Vec3(target.x, target.y, 0.0) or target.z != 0.0})
    return new_world, event


def _carry_position(user_pos: Vec3) -> Vec3:
    return Vec3(user_pos.x, user_pos.y, 1.0)


def _apply_pick(world: WorldState, object_id: str) -> tuple[WorldState, WorldEvent]:
    obj = world.find_object(object_id)
    if obj is None:
        return world, _rejected(f"no such object {object_id!r}")
    if not obj.movable:
        return world, _rejected(f"object {object_id!r} is not movable")
    if world.user.held_object is not None:
        return world, _rejected("already holding an object")
    if world.user.position.horizontal_distance(obj.position) > REACH_RADIUS_M:
        return world, _rejected(f"object {object_id!r} is out of reach")
    user = replace(world.user, held_object=object_id)
    new_world = _with_object_at(replace(world, user=user), object_id,
                                _carry_position(world.user.position))
    return new_world, WorldEvent("picked", {"object": object_id})


def _apply_place(world: WorldState, zone_id: str) -> tuple[WorldState, WorldEvent]:
    held = world.user.held_object
    if held is None:
        return world, _rejected("not holding an object")
    zone = world.find_zone(zone_id)
    if zone is None:
        return world, _rejected(f"no such zone {zone_id!r}")
    if world.user.position.horizontal_distance(zone.center) > REACH_RADIUS_M:
        return world, _rejected(f"zone {zone_id!r} is out of reach")
    user = replace(world.user, held_object=None)
    new_world = _with_object_at(replace(world, user=user), held, zone.center)
    return new_world, WorldEvent("placed", {"object": held, "zone": zone_id})


def _with_object_at(world: WorldState, object_id: str, position: Vec3) -> WorldState:
    objects = tuple(
        replace(o, position=position) if o.id == object_id else o for o in world.objects
    )
    return replace(world, objects=objects)
