"""Network boundary: one live session per websocket connection.

Client messages and server events share the envelope
``{"v": 1, "type": <string>, "body": {...}}``.  The bridge translates
messages into session operations and maps fresh session-log records back
into server events, so the event order a client sees is exactly the
session-log order.  The same bridge drives both the websocket endpoint and
direct (transport-free) script replays.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .clock import VirtualClock, WallClock
from .geometry import Vec3, project
from .harness import make_backend
from .loop import Session, start_session
from .perception import GazeSample
from .scenario import load_scenario
from .sessionlog import SessionLog
from .world import MoveTo, Pick, Place

PROTOCOL_VERSION = 1

_LOG_TAG_TO_EVENT = {
    "phrase": "phrase_echo",
    "fused_record": "fused_record_echo",
    "step_marker": "step_marker",
    "reasoning": "metrics_tick",
}


class SessionBridge:
    """Translates one client's messages; collects server events in log order."""

    def __init__(self, default_scenario: str = "corridor6") -> None:
        self.default_scenario = default_scenario
        self.session: Session | None = None
        self.condition = "scripted"
        self._log_cursor = 0
        self._prompt_tokens = 0
        self._completion_tokens = 0

    # -- protocol dispatch --

    def handle_text(self, data: str) -> list[dict]:
        try:
            msg = json.loads(data)
        except json.JSONDecodeError as exc:
            return [self._error(f"not valid JSON: {exc}")]
        return self.handle(msg)

    def handle(self, msg) -> list[dict]:
        if not isinstance(msg, dict) or msg.get("v") != PROTOCOL_VERSION:
            return [self._error("message envelope must be {\"v\":1,\"type\":...,\"body\":{...}}")]
        msg_type = msg.get("type")
        body = msg.get("body", {})
        if not isinstance(body, dict):
            return [self._error("body must be an object")]
        handler: Callable[[dict], list[dict]] | None = {
            "start": self._on_start,
            "set_condition": self._on_set_condition,
            "utterance": self._on_utterance,
            "gaze": self._on_gaze,
            "move": self._on_move,
            "pick": self._on_pick,
            "place": self._on_place,
            "operator_say": self._on_operator_say,
            "stop": self._on_stop,
        }.get(msg_type)
        if handler is None:
            return [self._error(f"unknown message type {msg_type!r}")]
        if self.session is None and msg_type not in ("start", "set_condition"):
            return [self._error("session not started")]
        if self.session is not None and "at" in body:
            self.session.clock.advance_to(int(body["at"]))
        try:
            return handler(body)
        except (ValueError, KeyError) as exc:
            return [self._error(str(exc))]

    # -- handlers --

    def _on_set_condition(self, body: dict) -> list[dict]:
        if self.session is not None:
            return [self._error("set_condition is only allowed before start")]
        mode = body.get("mode")
        if mode not in ("scripted", "llm"):
            return [self._error(f"unknown condition {mode!r}")]
        self.condition = mode
        return [self._event("ack", {"condition": mode})]

    def _on_start(self, body: dict) -> list[dict]:
        if self.session is not None:
            return [self._error("session already started")]
        scenario_source = body.get("scenario", self.default_scenario)
        condition = body.get("condition", self.condition)
        backend_spec = body.get("backend", "scripted" if condition == "scripted" else "replay:")
        seed = int(body.get("seed", 0))
        time_mode = body.get("time_mode", "wall")
        world, spec = load_scenario(scenario_source)
        clock = VirtualClock() if time_mode == "virtual" else WallClock()
        holder: dict[str, Session] = {}
        backend = make_backend(backend_spec, spec,
                               lambda: holder["session"].current_step.id)
        self.session = start_session(world, spec, condition, backend,
                                     clock=clock, seed=seed)
        holder["session"] = self.session
        self.condition = condition
        events = self._drain_log()
        events.append(self._snapshot_event())
        return events

    def _on_utterance(self, body: dict) -> list[dict]:
        text = str(body.get("text", "")).strip()
        if not text:
            return [self._error("utterance text must be non-empty")]
        self.session.submit_utterance(text)
        return self._drain_log() or [self._error("utterance produced no phrase")]

    def _on_operator_say(self, body: dict) -> list[dict]:
        text = str(body.get("text", "")).strip()
        if not text:
            return [self._error("operator text must be non-empty")]
        self.session.inject_operator_phrase(text)
        return self._drain_log()

    def _on_gaze(self, body: dict) -> list[dict]:
        session = self.session
        now = session.clock.now()
        if "object_id" in body:
            obj = session.world.find_object(str(body["object_id"]))
            if obj is None:
                return [self._error(f"unknown object {body['object_id']!r}")]
            camera = session.world.user.head_camera
            pixel = project(camera, obj.position)
            if pixel is None:
                return [self._error(f"object {obj.id!r} is not in the user's view")]
            sample = GazeSample(now, (pixel.u / camera.width, pixel.v / camera.height), True)
        elif "point" in body:
            gx, gy = body["point"]
            sample = GazeSample(now, (float(gx), float(gy)), True)
        else:
            return [self._error("gaze requires object_id or point")]
        session.gaze(sample)
        events = self._drain_log_filtered()
        events.append(self._snapshot_event())
        return events

    def _on_move(self, body: dict) -> list[dict]:
        return self._world_action(MoveTo(Vec3(float(body["x"]), float(body["y"]), 0.0)))

    def _on_pick(self, body: dict) -> list[dict]:
        return self._world_action(Pick(str(body["object_id"])))

    def _on_place(self, body: dict) -> list[dict]:
        return self._world_action(Place(str(body["zone_id"])))

    def _world_action(self, action) -> list[dict]:
        event = self.session.user_action(action)
        events = self._drain_log()
        events.append(self._snapshot_event())
        if not event.accepted:
            events.insert(0, self._error(event.detail.get("reason", "action rejected")))
        return events

    def _on_stop(self, body: dict) -> list[dict]:
        log = self.session.terminate()
        events = self._drain_log()
        ack_body = {"stopped": True, "status": log.records[-1]["status"]}
        if body.get("include_log"):
            ack_body["log_ndjson"] = log.to_ndjson()
        events.append(self._event("ack", ack_body))
        return events

    # -- event rendering --

    def _error(self, reason: str) -> dict:
        return self._event("error", {"reason": reason})

    def _event(self, event_type: str, body: dict) -> dict:
        session_id = self.session.session_id if self.session is not None else ""
        ts = self.session.clock.now() if self.session is not None else 0
        return {"v": PROTOCOL_VERSION, "type": event_type, "body": body,
                "session_id": session_id, "ts": ts}

    def _snapshot_event(self) -> dict:
        session = self.session
        world = session.world
        target = session.gaze_tracker.current()
        body = {
            "clock": session.clock.now(),
            "corridor": {"width": world.corridor_width, "length": world.corridor_length},
            "user": {"x": world.user.position.x, "y": world.user.position.y,
                     "heading": world.user.heading_deg,
                     "held_object": world.user.held_object},
            "objects": [
                {"id": o.id, "category": o.category, "color": o.color,
                 "x": o.position.x, "y": o.position.y, "z": o.position.z,
                 "radius": o.radius, "movable": o.movable}
                for o in world.objects
            ],
            "zones": [
                {"id": z.id, "kind": z.kind, "x": z.center.x, "y": z.center.y,
                 "radius": z.radius}
                for z in world.zones
            ],
            "gaze_target": target.object_id,
            "step": {"id": session.current_step.id,
                     "instruction": session.current_step.instruction_text},
            "condition": session.condition,
            "state": session.state.value,
            "completed": session.completed,
        }
        return self._event("world_snapshot", body)

    def _drain_log(self) -> list[dict]:
        return self._drain_log_filtered()

    def _drain_log_filtered(self) -> list[dict]:
        session = self.session
        events: list[dict] = []
        records = session.log.records
        while self._log_cursor < len(records):
            record = records[self._log_cursor]
            self._log_cursor += 1
            event = self._map_record(record)
            if event is not None:
                events.append(event)
        return events

    def _map_record(self, record: dict) -> dict | None:
        tag = record["tag"]
        body = {k: v for k, v in record.items()
                if k not in ("tag", "ts", "session_id", "condition", "seed")}
        if tag == "action_event":
            kind = record["kind"]
            if kind == "speak":
                return self._stamp("speak", {"text": record["body"]["text"],
                                             "duration_ms": record["body"]["duration_ms"]},
                                   record["ts"])
            if kind == "gesture":
                return self._stamp("gesture", dict(record["body"]), record["ts"])
            if kind == "lamp":
                return self._stamp("lamp_state", {"state": record["body"]["state"]},
                                   record["ts"])
            return self._stamp("ack", {"kind": kind, **record["body"]}, record["ts"])
        if tag == "reasoning":
            self._prompt_tokens += record["prompt_tokens"]
            self._completion_tokens += record["completion_tokens"]
            return self._stamp("metrics_tick", {
                "latency_ms": record["latency_ms"],
                "prompt_tokens": self._prompt_tokens,
                "completion_tokens": self._completion_tokens,
                "cot": record["cot"],
            }, record["ts"])
        if tag in ("dropped_phrase", "reasoning_error"):
            return self._stamp("error", {"reason": body.get("reason", tag), **body},
                               record["ts"])
        if tag in _LOG_TAG_TO_EVENT:
            return self._stamp(_LOG_TAG_TO_EVENT[tag], body, record["ts"])
        return None

    def _stamp(self, event_type: str, body: dict, ts: int) -> dict:
        session_id = self.session.session_id if self.session is not None else ""
        return {"v": PROTOCOL_VERSION, "type": event_type, "body": body,
                "session_id": session_id, "ts": ts}


def run_message_script(script: list[dict], default_scenario: str = "corridor6",
                       stop: bool = True) -> tuple[list[dict], SessionLog | None]:
    """Replay a message script directly through a bridge, no transport involved."""
    bridge = SessionBridge(default_scenario)
    events: list[dict] = []
    for msg in script:
        events.extend(bridge.handle(msg))
    log = None
    if bridge.session is not None:
        if stop:
            bridge.session.terminate()
        log = bridge.session.log
    return events, log


def create_app(static_dir: str | Path | None = None,
               default_scenario: str = "corridor6") -> FastAPI:
    app = FastAPI(title="hri-sim session service")

    @app.websocket("/session")
    async def session_socket(websocket: WebSocket) -> None:
        await websocket.accept()
        bridge = SessionBridge(default_scenario)
        try:
            while True:
                data = await websocket.receive_text()
                for event in bridge.handle_text(data):
                    await websocket.send_text(json.dumps(event, ensure_ascii=False))
        except WebSocketDisconnect:
            if bridge.session is not None:
                bridge.session.terminate()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    else:
        @app.get("/")
        async def index() -> dict:
            return {"service": "hri-sim", "ui": "not built",
                    "hint": "build the frontend and serve with --static <dir>"}

    return app
