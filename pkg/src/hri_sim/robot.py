"""Robot abstraction: the four high-level wrappers and a simulated adapter.

A conforming adapter offers speech, signal display, motion execution, and
low-level planning.  The simulated adapter renders these as timed
ActionEvents: speech duration follows a words-per-second rate, gestures
take their catalog duration, and the state lamp coalesces repeats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .clock import TimeSource
from .geometry import Vec3, bearing_deg
from .textutil import split_sentences
from .world import WorldState

REQUIRED_CAPABILITIES = ("speech", "signal_display", "motion_execution", "low_level_planning")
LAMP_STATES = ("listening", "thinking", "success", "error")
MAX_SPOKEN_SENTENCES = 2


class ActionError(ValueError):
    """A wrapper call was rejected (bad argument, unknown gesture, missing target)."""


@dataclass(frozen=True)
class GestureSpec:
    name: str
    duration_ms: int


@dataclass(frozen=True)
class AdapterDescriptor:
    robot_name: str
    capabilities: frozenset[str]
    gesture_catalog: tuple[GestureSpec, ...]


def conformance_check(descriptor: AdapterDescriptor) -> list[str]:
    """Names of required wrapper capabilities the adapter is missing."""
    return [c for c in REQUIRED_CAPABILITIES if c not in descriptor.capabilities]


@dataclass(frozen=True)
class ActionEvent:
    timestamp_ms: int
    kind: str  # speak | gesture | lamp | plan
    body: dict
    session_id: str = ""

    def __post_init__(self) -> None:
        if self.body.get("duration_ms", 0) < 0:
            raise ValueError("duration_ms must be >= 0")
        if self.kind == "lamp" and self.body.get("state") not in LAMP_STATES:
            raise ValueError(f"unknown lamp state {self.body.get('state')!r}")

    @property
    def end_ms(self) -> int:
        return self.timestamp_ms + int(self.body.get("duration_ms", 0))


@dataclass(frozen=True)
class SimAdapterConfig:
    speech_rate_wps: float = 2.5
    dispatch_latency_ms: int = 150
    gestures: tuple[GestureSpec, ...] = (
        GestureSpec("nod", 1200),
        GestureSpec("shake_head", 1400),
        GestureSpec("point", 2000),
    )

    def __post_init__(self) -> None:
        if self.speech_rate_wps <= 0 or self.dispatch_latency_ms <= 0:
            raise ValueError("timing parameters must be positive")
        for g in self.gestures:
            if g.duration_ms <= 0:
                raise ValueError(f"gesture {g.name!r}: duration must be positive")


class SimAdapter:
    """Simulated communication head: emits events and advances the clock through them."""

    def __init__(
        self,
        clock: TimeSource,
        config: SimAdapterConfig | None = None,
        world_provider: Callable[[], WorldState | None] = lambda: None,
        session_id: str = "",
        on_event: Callable[[ActionEvent], None] | None = None,
        on_warning: Callable[[str], None] | None = None,
    ) -> None:
        self.config = config or SimAdapterConfig()
        self._clock = clock
        self._world_provider = world_provider
        self.session_id = session_id
        self._on_event = on_event
        self._on_warning = on_warning
        self.events: list[ActionEvent] = []
        self.warnings: list[str] = []
        self._last_lamp: str | None = None
        self._last_ts = 0

    def descriptor(self) -> AdapterDescriptor:
        return AdapterDescriptor(
            robot_name="sim-armod",
            capabilities=frozenset(REQUIRED_CAPABILITIES),
            gesture_catalog=self.config.gestures,
        )

    # -- the four wrappers --

    def talker(self, text: str) -> ActionEvent:
        if not isinstance(text, str) or not text.strip():
            raise ActionError("talker requires non-empty text")
        sentences = split_sentences(text)
        spoken = text.strip()
        if len(sentences) > MAX_SPOKEN_SENTENCES:
            spoken = " ".join(sentences[:MAX_SPOKEN_SENTENCES])
            self._warn(f"speech truncated from {len(sentences)} to {MAX_SPOKEN_SENTENCES} sentences")
        duration = round(len(spoken.split()) / self.config.speech_rate_wps * 1000)
        return self._emit("speak", {"text": spoken, "duration_ms": duration},
                          latency=True, occupies=True)

    def executor(self, gesture: str, target: str | None = None) -> ActionEvent:
        spec = next((g for g in self.config.gestures if g.name == gesture), None)
        if spec is None:
            raise ActionError(f"unknown gesture {gesture!r}")
        body: dict = {"name": gesture, "duration_ms": spec.duration_ms}
        if gesture == "point":
            if target is None:
                raise ActionError("point requires a target id")
            body["target"] = target
            body["bearing_deg"] = self._bearing_to(target)
        elif target is not None:
            body["target"] = target
        return self._emit("gesture", body, latency=True, occupies=True)

    def set_state(self, state: str) -> ActionEvent | None:
        if state not in LAMP_STATES:
            raise ActionError(f"unknown lamp state {state!r}")
        if state == self._last_lamp:
            return None
        self._last_lamp = state
        return self._emit("lamp", {"state": state}, latency=False, occupies=False)

    def plan(self, goal: str) -> ActionEvent:
        if not isinstance(goal, str) or not goal.strip():
            raise ActionError("plan requires a non-empty goal")
        return self._emit("plan", {"goal": goal.strip()}, latency=True, occupies=False)

    # -- program-facing dispatch --

    def perform(self, name: str, args: list) -> ActionEvent | None:
        if name == "talker":
            return self.talker(self._as_text(args, 0))
        if name == "executor":
            target = self._as_target(args[1]) if len(args) > 1 else None
            return self.executor(self._as_text(args, 0), target)
        if name == "nod":
            return self.executor("nod")
        if name == "shake_head":
            return self.executor("shake_head")
        if name == "point":
            if not args:
                raise ActionError("point requires a target id")
            return self.executor("point", self._as_target(args[0]))
        if name == "plan":
            return self.plan(self._as_text(args, 0))
        raise ActionError(f"unknown activity {name!r}")

    # -- internals --

    @staticmethod
    def _as_text(args: list, index: int) -> str:
        if len(args) <= index or not isinstance(args[index], str):
            raise ActionError("expected a text argument")
        return args[index]

    @staticmethod
    def _as_target(value) -> str:
        if isinstance(value, str):
            return value
        obj_id = getattr(value, "id", None)
        if isinstance(obj_id, str) and obj_id:
            return obj_id
        raise ActionError(f"cannot use {value!r} as a pointing target")

    def _bearing_to(self, target_id: str) -> float:
        world = self._world_provider()
        if world is None:
            return 0.0
        target = world.find_object(target_id)
        position = target.position if target is not None else None
        if position is None:
            zone = world.find_zone(target_id)
            if zone is None:
                raise ActionError(f"unknown pointing target {target_id!r}")
            position = zone.center
        return bearing_deg(self._robot_origin(world), position)

    @staticmethod
    def _robot_origin(world: WorldState) -> Vec3:
        robot = world.find_object("robot")
        if robot is not None:
            return robot.position
        for cam in world.cameras:
            return cam.position
        return Vec3(0.0, 0.0, 0.0)

    def _emit(self, kind: str, body: dict, latency: bool, occupies: bool) -> ActionEvent:
        ts = self._clock.now() + (self.config.dispatch_latency_ms if latency else 0)
        ts = max(ts, self._last_ts)  # per-session timestamps never decrease
        event = ActionEvent(ts, kind, body, self.session_id)
        self._last_ts = ts
        self.events.append(event)
        if self._on_event is not None:
            self._on_event(event)
        if occupies:
            self._clock.advance_to(event.end_ms)
        return event

    def _warn(self, message: str) -> None:
        self.warnings.append(message)
        if self._on_warning is not None:
            self._on_warning(message)
