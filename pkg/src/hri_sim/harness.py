"""Headless session runner: scripted user policies under virtual time.

A policy drives the avatar through the scenario steps by reading each
step's completion predicate: walk into zones, pick objects, place them.
Question-asking policies speak through the simulated word stream and gaze
at their object of interest while asking.  Everything is scheduled on one
deterministic event queue, so identical arguments replay identical logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .backends import Backend, BackendConfig, RemoteBackend, ReplayBackend, ScriptedBackend
from .clock import EventQueue, VirtualClock
from .geometry import Vec3, project
from .loop import Session, start_session
from .perception import GazeSample
from .scenario import (
    CompletionPredicate, ObjectHeld, ObjectInZone, ScenarioSpec, StepSpec,
    UserInZone, load_scenario,
)
from .sessionlog import SessionLog
from .speech import TranscriptEvent
from .world import REACH_RADIUS_M, MoveTo, Pick, Place

DEADLOCK_MS = 120_000
_WORD_SPACING_MS = 400
_POLICY_KINDS = ("silent", "clarifier", "confused", "idle")


@dataclass(frozen=True)
class UserPolicy:
    kind: str
    questions_per_step: int = 1          # k, for the confused kind
    movement_speed_mps: float = 1.0
    gaze_hz: float = 20.0
    reaction_pause_ms: int = 500
    manipulation_ms: int = 800
    question_templates: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in _POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "confused" and self.questions_per_step < 1:
            raise ValueError("confused policies must ask at least one question per step")
        if self.movement_speed_mps <= 0:
            raise ValueError("movement speed must be positive")

    def question_for(self, step: StepSpec) -> str:
        if step.id in self.question_templates:
            return self.question_templates[step.id]
        if step.ambiguity_note is not None:
            return "which box do you mean"
        return "what should I do next"


def silent_policy() -> UserPolicy:
    return UserPolicy("silent")


def clarifier_policy() -> UserPolicy:
    return UserPolicy("clarifier")


def confused_policy(questions_per_step: int = 2) -> UserPolicy:
    return UserPolicy("confused", questions_per_step=questions_per_step)


def make_backend(spec: str, scenario: ScenarioSpec,
                 step_provider: Callable[[], str],
                 config: BackendConfig | None = None) -> Backend:
    """Build a backend from its CLI form: scripted | replay:<file> | remote.

    Replay paths starting with ``@`` name a bundled transcript, e.g.
    ``replay:@clarifier_corridor6``.
    """
    if spec == "scripted":
        return ScriptedBackend(scenario, step_provider)
    if spec.startswith("replay:"):
        path = spec.split(":", 1)[1]
        if path.startswith("@"):
            from importlib import resources
            text = resources.files("hri_sim").joinpath(
                f"assets/replays/{path[1:]}.ndjson").read_text("utf-8")
            import json as _json
            return ReplayBackend([_json.loads(line) for line in text.splitlines()
                                  if line.strip()])
        return ReplayBackend.from_file(path)
    if spec == "remote" or spec.startswith("remote:"):
        endpoint = spec.split(":", 1)[1] if ":" in spec else ""
        cfg = config or BackendConfig("remote", endpoint=endpoint)
        if endpoint and cfg.endpoint != endpoint:
            cfg = BackendConfig("remote", model_name=cfg.model_name,
                                temperature=cfg.temperature, endpoint=endpoint,
                                timeout_ms=cfg.timeout_ms, max_retries=cfg.max_retries)
        return RemoteBackend(cfg)
    raise ValueError(f"unknown backend spec {spec!r}")


class PolicyDriver:
    """Schedules one policy's behaviour onto the session's event queue."""

    def __init__(self, session: Session, queue: EventQueue, policy: UserPolicy) -> None:
        self.session = session
        self.queue = queue
        self.policy = policy
        self._cursor = 0
        self._planned_pos = session.world.user.position
        self._after_turn: list[Callable[[], None]] = []
        self._gaze_seq = 0

    def begin(self) -> None:
        self.session.step_listeners.append(self._on_step_issued)
        self.session.turn_listeners.append(self._on_turn_complete)
        self._plan_step(self.session.current_step)

    # -- listeners --

    def _on_step_issued(self, step: StepSpec) -> None:
        self.queue.schedule(self.queue.clock.now(), lambda: self._plan_step(step))

    def _on_turn_complete(self) -> None:
        pending, self._after_turn = self._after_turn, []
        for continuation in pending:
            continuation()

    # -- step planning --

    def _plan_step(self, step: StepSpec) -> None:
        self._cursor = self.queue.clock.now() + self.policy.reaction_pause_ms
        if self.policy.kind == "idle":
            self._idle_gaze(step)
            return
        questions = 0
        if self.policy.kind == "clarifier" and step.ambiguity_note is not None:
            questions = 1
        elif self.policy.kind == "confused":
            questions = self.policy.questions_per_step
        if questions > 0:
            self._ask_then_perform(step, questions)
        else:
            self._perform(step, reply_text=None)

    def _ask_then_perform(self, step: StepSpec, remaining: int) -> None:
        self._ask(step)
        def continuation() -> None:
            if remaining > 1:
                self._cursor = self.queue.clock.now() + self.policy.reaction_pause_ms
                self._ask_then_perform(step, remaining - 1)
            else:
                self._cursor = self.queue.clock.now() + self.policy.reaction_pause_ms
                self._perform(step, reply_text=self._last_reply_text())
        self._after_turn.append(continuation)

    def _idle_gaze(self, step: StepSpec) -> None:
        target = step.pointing_target or (self.session.world.objects[0].id
                                          if self.session.world.objects else None)
        def rearm() -> None:
            if target is not None:
                self._emit_gaze_sample(target)
            self.queue.schedule(self.queue.clock.now() + 1000, rearm)
        self.queue.schedule(self._cursor, rearm)

    # -- behaviour primitives --

    def _perform(self, step: StepSpec, reply_text: str | None) -> None:
        predicate = step.completion
        if isinstance(predicate, UserInZone):
            zone = self.session.world.find_zone(predicate.zone)
            if zone is not None:
                self._walk_to(Vec3(zone.center.x, zone.center.y, 0.0),
                              face=self._face_point(step))
        elif isinstance(predicate, ObjectHeld):
            self._go_pick(predicate.object)
        elif isinstance(predicate, ObjectInZone):
            if self.session.world.user.held_object != predicate.object:
                self._go_pick(predicate.object)
            zone_id = self._choose_zone(predicate, reply_text)
            zone = self.session.world.find_zone(zone_id)
            if zone is not None:
                self._approach(zone.center)
                self._gaze_burst(zone_id, self._cursor, 600)
                self._cursor += self.policy.manipulation_ms
                self._schedule_action(Place(zone_id))

    def _go_pick(self, object_id: str) -> None:
        obj = self.session.world.find_object(object_id)
        if obj is None:
            return
        self._approach(obj.position)
        self._gaze_burst(object_id, self._cursor, 600)
        self._cursor += self.policy.manipulation_ms
        self._schedule_action(Pick(object_id))

    def _approach(self, target: Vec3, standoff: float = 0.9) -> None:
        assert standoff < REACH_RADIUS_M
        pos = self._planned_pos
        dist = pos.horizontal_distance(target)
        if dist <= standoff:
            return
        k = (dist - standoff) / dist
        dest = Vec3(pos.x + (target.x - pos.x) * k, pos.y + (target.y - pos.y) * k, 0.0)
        self._walk_to(dest, face=target)

    def _walk_to(self, dest: Vec3, face: Vec3 | None = None) -> None:
        pos = self._planned_pos
        dist = pos.horizontal_distance(dest)
        travel_ms = int(dist / self.policy.movement_speed_mps * 1000)
        self._cursor += travel_ms
        if face is not None and face.horizontal_distance(dest) > 1e-6:
            # Arrive via a pre-waypoint so the final heading faces the target.
            d = face - dest
            n = math.hypot(d.x, d.y)
            pre = Vec3(dest.x - d.x / n * 0.01, dest.y - d.y / n * 0.01, 0.0)
            self._schedule_action(MoveTo(pre), at=self._cursor - 1)
        self._schedule_action(MoveTo(Vec3(dest.x, dest.y, 0.0)))
        self._planned_pos = Vec3(dest.x, dest.y, 0.0)

    def _ask(self, step: StepSpec) -> None:
        question = self.policy.question_for(step)
        gaze_target = self._gaze_target_for(step)
        words = question.split()
        start = self._cursor
        for i, word in enumerate(words):
            ts = start + i * _WORD_SPACING_MS
            self.queue.schedule(ts, self._word_emitter(word, ts))
        last_ts = start + (len(words) - 1) * _WORD_SPACING_MS
        if gaze_target is not None:
            self._gaze_burst(gaze_target, start, last_ts - start + 1500)
        deadline = last_ts + self.session.segmenter.config.silence_gap_ms
        self.queue.schedule(deadline, lambda: self.session.check_silence())
        self._cursor = deadline

    def _word_emitter(self, word: str, ts: int) -> Callable[[], None]:
        return lambda: self.session.push_word(TranscriptEvent(ts, word, 0.9))

    def _schedule_action(self, action, at: int | None = None) -> None:
        t = self._cursor if at is None else at
        self.queue.schedule(t, lambda: self.session.user_action(action))

    def _gaze_burst(self, target_id: str, start_ms: int, duration_ms: int) -> None:
        period = max(1, int(1000 / self.policy.gaze_hz))
        for i in range(max(1, duration_ms // period)):
            self.queue.schedule(start_ms + i * period,
                                lambda t=target_id: self._emit_gaze_sample(t))

    def _emit_gaze_sample(self, target_id: str) -> None:
        world = self.session.world
        now = self.queue.clock.now()
        self._gaze_seq += 1
        pupil = round(3.0 + 0.01 * (self._gaze_seq % 40), 3)
        obj = world.find_object(target_id)
        pixel = project(world.user.head_camera, obj.position) if obj is not None else None
        if pixel is None:
            sample = GazeSample(now, (0.0, 0.0), valid=False, pupil_diameter_mm=pupil)
        else:
            cam = world.user.head_camera
            sample = GazeSample(now, (pixel.u / cam.width, pixel.v / cam.height),
                                valid=True, pupil_diameter_mm=pupil)
        self.session.gaze(sample)

    # -- helpers --

    def _face_point(self, step: StepSpec) -> Vec3 | None:
        target = step.pointing_target
        if target is None:
            return None
        obj = self.session.world.find_object(target)
        if obj is not None:
            return obj.position
        zone = self.session.world.find_zone(target)
        return zone.center if zone is not None else None

    def _gaze_target_for(self, step: StepSpec) -> str | None:
        predicate = step.completion
        if isinstance(predicate, ObjectInZone):
            return predicate.zones[0]
        if isinstance(predicate, ObjectHeld):
            return predicate.object
        return step.pointing_target

    def _choose_zone(self, predicate: ObjectInZone, reply_text: str | None) -> str:
        if reply_text is None or len(predicate.zones) == 1:
            return predicate.zones[0]
        reply = reply_text.lower()
        shared = set.intersection(*(set(z.split("_")) for z in predicate.zones))
        for zone_id in predicate.zones:
            distinctive = [part for part in zone_id.split("_") if part not in shared]
            if any(part in reply for part in distinctive):
                return zone_id
        return predicate.zones[0]

    def _last_reply_text(self) -> str | None:
        for record in reversed(self.session.log.records):
            if record["tag"] == "action_event" and record["kind"] == "speak":
                return record["body"]["text"]
            if record["tag"] == "phrase":
                break
        return None


def run_session(
    scenario_source,
    condition: str,
    policy: UserPolicy,
    backend_spec: str,
    seed: int = 0,
    deadlock_ms: int = DEADLOCK_MS,
    operator_says: list[tuple[int, str]] | None = None,
    **session_kwargs,
) -> SessionLog:
    """Drive one full headless session and return its complete log."""
    world, spec = load_scenario(scenario_source)
    clock = VirtualClock()
    queue = EventQueue(clock)
    holder: dict[str, Session] = {}
    backend = make_backend(backend_spec, spec,
                           lambda: holder["session"].current_step.id)
    session = start_session(
        world, spec, condition, backend, clock=clock, seed=seed,
        session_id=f"{spec.name}-{condition}-{policy.kind}-s{seed}",
        **session_kwargs,
    )
    holder["session"] = session
    for at_ms, text in operator_says or []:
        queue.schedule(at_ms, lambda t=text: session.inject_operator_phrase(t))
    driver = PolicyDriver(session, queue, policy)
    driver.begin()

    last_progress = clock.now()
    last_index = session.step_index
    while not session.completed:
        if not queue.run_next():
            session.abort("no scheduled events remain")
            break
        if session.step_index != last_index:
            last_index = session.step_index
            last_progress = clock.now()
        if clock.now() - last_progress > deadlock_ms:
            session.abort(f"no step progress for {deadlock_ms} ms")
            break
    return session.terminate()
