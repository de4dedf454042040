"""The task-oriented interaction loop.

One Session drives one scenario run: the planner issues steps in order, the
segmenter turns word streams into phrases, each phrase is fused with a
perception snapshot, handed to the backend, and the resulting program is
validated and executed on the robot adapter.  States: listening, fusing,
thinking, acting, error.  A failed output gets exactly one repair attempt;
the second failure announces an error and returns to listening.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import dsl
from .backends import Backend, BackendError
from .catalog import ApiCatalog, default_catalog
from .clock import TimeSource, VirtualClock
from .dsl import ExecBudget
from .fusion import Snapshot, fuse, serialize
from .perception import GazeSample, GazeTracker, NoiseConfig, caption, render_detections
from .reasoning import (
    Conversation,
    ConversationLimitError,
    ParseFailure,
    PromptTemplate,
    ReasoningOutput,
    build_system_prompt,
    query,
    repair_once,
)
from .robot import ActionError, ActionEvent, SimAdapter, conformance_check
from .scenario import ScenarioSpec, StepSpec, step_complete
from .sessionlog import SessionLog
from .speech import Phrase, PhraseSegmenter, SegmenterConfig, TranscriptEvent
from .world import UserAction, WorldEvent, WorldState, apply_user_action

RECOVERY_TEXT = "Sorry, something went wrong. Please repeat."


class LoopState(str, Enum):
    LISTENING = "listening"
    FUSING = "fusing"
    THINKING = "thinking"
    ACTING = "acting"
    ERROR = "error"


@dataclass(frozen=True)
class TaskRequest:
    step: StepSpec
    issued_ts: int


class SessionStartupError(RuntimeError):
    pass


class Session:
    def __init__(
        self,
        world: WorldState,
        scenario: ScenarioSpec,
        condition: str,
        backend: Backend,
        clock: TimeSource | None = None,
        seed: int = 0,
        adapter: SimAdapter | None = None,
        catalog: ApiCatalog | None = None,
        template: PromptTemplate | None = None,
        segmenter_config: SegmenterConfig | None = None,
        noise: NoiseConfig | None = None,
        exec_budget: ExecBudget | None = None,
        session_id: str | None = None,
        robot_camera_id: str = "robot_cam",
        wall_latency: bool = False,
        adapter_config=None,
    ) -> None:
        if condition not in ("scripted", "llm"):
            raise ValueError(f"unknown condition {condition!r}")
        if condition == "scripted" and backend.kind != "scripted":
            raise ValueError("the scripted condition requires the scripted backend")
        if condition == "llm" and backend.kind == "scripted":
            raise ValueError("the llm condition requires a replay or remote backend")
        self.world = world
        self.scenario = scenario
        self.condition = condition
        self.backend = backend
        self.seed = seed
        self.clock = clock or VirtualClock()
        self.session_id = session_id or f"{scenario.name}-{condition}-s{seed}"
        self.catalog = catalog or default_catalog()
        self.noise = noise if noise is not None else NoiseConfig()
        self.exec_budget = exec_budget or ExecBudget()
        self.robot_camera_id = robot_camera_id
        self.wall_latency = wall_latency

        self.log = SessionLog(self.session_id, condition, seed)
        self.segmenter = PhraseSegmenter(segmenter_config)
        self.gaze_tracker = GazeTracker()
        self.adapter = adapter or SimAdapter(
            self.clock,
            config=adapter_config,
            world_provider=lambda: self.world,
            session_id=self.session_id,
            on_event=self._log_action_event,
            on_warning=self._log_warning,
        )
        self.state = LoopState.LISTENING
        self.step_index = 0
        self.completed = False
        self.aborted = False
        self._started = False
        self._terminated: SessionLog | None = None
        self._turn = 0
        self._current_turn: int | None = None
        # Hooks for harness policies and service bridges.
        self.step_listeners: list = []
        self.turn_listeners: list = []

        template = template or PromptTemplate.default()
        context = (
            f"The current task area is a {scenario.corridor_length:g} x "
            f"{scenario.corridor_width:g} m corridor named {scenario.name}."
        )
        self.conversation = Conversation.start(
            build_system_prompt(template, self.catalog, context)
        )

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        if self._started:
            return
        missing = conformance_check(self.adapter.descriptor())
        if missing:
            raise SessionStartupError(
                f"adapter is missing required capabilities: {', '.join(missing)}"
            )
        self._started = True
        head = self.world.user.head_camera
        self.log.append("session_start", self.clock.now(),
                        scenario=self.scenario.name, steps=len(self.scenario.steps),
                        schema_version=1,
                        head_camera={"h_fov": head.h_fov_deg, "v_fov": head.v_fov_deg,
                                     "width": head.width, "height": head.height})
        self._issue_step(self.scenario.steps[0])
        self._set_state(LoopState.LISTENING)
        self._lamp("listening")

    @property
    def current_step(self) -> StepSpec:
        index = min(self.step_index, len(self.scenario.steps) - 1)
        return self.scenario.steps[index]

    def terminate(self) -> SessionLog:
        if self._terminated is not None:
            return self._terminated
        status = "completed" if self.completed else "aborted"
        self.log.append("session_end", self.clock.now(), status=status)
        self._terminated = self.log
        return self.log

    def abort(self, reason: str) -> SessionLog:
        if self._terminated is None:
            self.aborted = True
            self.log.append("abort", self.clock.now(), reason=reason)
        return self.terminate()

    # -- inputs ---------------------------------------------------------------

    def push_word(self, ev: TranscriptEvent) -> int | None:
        """Feed one transcribed word; returns the new silence deadline."""
        self.segmenter.push_word(ev)
        return self.segmenter.silence_deadline_ms

    def check_silence(self, now_ms: int | None = None) -> Phrase | None:
        phrase = self.segmenter.tick(self.clock.now() if now_ms is None else now_ms)
        if phrase is not None:
            self.on_phrase(phrase)
        return phrase

    def submit_utterance(self, text: str) -> Phrase | None:
        """UI submission path: words land and finalize immediately."""
        now = self.clock.now()
        for word in text.split():
            self.segmenter.push_word(TranscriptEvent(now, word, 1.0))
        phrase = self.segmenter.flush(now)
        if phrase is not None:
            self.on_phrase(phrase)
        return phrase

    def inject_operator_phrase(self, text: str) -> Phrase:
        phrase = self.segmenter.inject_operator_phrase(text, self.clock.now())
        self.on_phrase(phrase)
        return phrase

    def user_action(self, action: UserAction) -> WorldEvent:
        new_world, event = apply_user_action(self.world.at_clock(self.clock.now()), action)
        self.world = new_world
        self.log.append("world_event", self.clock.now(), kind=event.kind, **event.detail)
        if event.accepted:
            self.on_world_event(event)
        return event

    def gaze(self, sample: GazeSample) -> None:
        target = self.gaze_tracker.resolve(sample, self.world)
        head = self.world.user.head_camera
        self.log.append(
            "gaze_sample", sample.timestamp_ms,
            point=list(sample.point), valid=sample.valid,
            pupil_mm=sample.pupil_diameter_mm,
            head={"pos": [head.position.x, head.position.y, head.position.z],
                  "yaw": head.yaw_deg, "pitch": head.pitch_deg},
            target=target.object_id,
        )

    # -- the loop -------------------------------------------------------------

    def on_phrase(self, phrase: Phrase) -> None:
        if not self._started or self._terminated is not None:
            return
        if self.state is not LoopState.LISTENING:
            self.log.append("dropped_phrase", self.clock.now(),
                            text=phrase.text, reason="busy", state=self.state.value)
            return
        self._turn += 1
        self._current_turn = self._turn
        self.log.append("phrase", self.clock.now(), text=phrase.text,
                        source=phrase.source, start_ts=phrase.start_ts,
                        end_ts=phrase.end_ts, turn=self._turn)

        self._set_state(LoopState.FUSING)
        record = fuse(phrase, self._snapshot(), self.current_step)
        self.log.append("fused_record", self.clock.now(),
                        serialized=serialize(record), turn=self._turn)

        self._set_state(LoopState.THINKING)
        self._lamp("thinking")
        self._think_and_act(record)
        self._current_turn = None
        for listener in list(self.turn_listeners):
            listener()

    def _think_and_act(self, record) -> None:
        failure_reason: str | None = None
        for attempt in (1, 2):
            try:
                if attempt == 1:
                    output = query(self.conversation, record, self.backend, self.wall_latency)
                else:
                    assert failure_reason is not None
                    output = repair_once(self.conversation, failure_reason,
                                         self.backend, self.wall_latency)
            except ParseFailure as failure:
                failure_reason = failure.reason
                self.log.append("reasoning_error", self.clock.now(),
                                reason=failure.reason, attempt=attempt, turn=self._current_turn)
                continue
            except (BackendError, ConversationLimitError) as failure:
                self.log.append("reasoning_error", self.clock.now(),
                                reason=str(failure), attempt=attempt, terminal=True,
                                turn=self._current_turn)
                self._enter_error_state()
                return

            self.log.append(
                "reasoning", self.clock.now(), turn=self._current_turn,
                latency_ms=output.latency_ms, prompt_tokens=output.prompt_tokens,
                completion_tokens=output.completion_tokens, cot=output.cot_text,
                program=output.program_source, attempt=attempt,
            )
            failure_reason = self._act(output, record)
            if failure_reason is None:
                self._lamp("success")
                self._set_state(LoopState.LISTENING)
                self._lamp("listening")
                return
            self.log.append("reasoning_error", self.clock.now(),
                            reason=failure_reason, attempt=attempt, turn=self._current_turn)
        self._enter_error_state()

    def _act(self, output: ReasoningOutput, record) -> str | None:
        """Parse, validate, and execute a program; returns a failure reason or None."""
        self._set_state(LoopState.ACTING)
        try:
            program = dsl.parse(output.program_source)
        except dsl.ParseError as exc:
            self._set_state(LoopState.THINKING)
            return str(exc)
        violations = dsl.validate(program, self.catalog)
        if violations:
            self._set_state(LoopState.THINKING)
            return "; ".join(str(v) for v in violations)
        trace = dsl.execute(program, record, self.adapter, self.exec_budget)
        for note in trace.cot_notes:
            self.log.append("cot_note", self.clock.now(), text=note, turn=self._current_turn)
        if not trace.ok:
            self._set_state(LoopState.THINKING)
            return f"{trace.status}: {trace.error}"
        return None

    def _enter_error_state(self) -> None:
        self._set_state(LoopState.ERROR)
        self._lamp("error")
        try:
            self.adapter.talker(RECOVERY_TEXT)
        except ActionError:
            pass
        self._set_state(LoopState.LISTENING)
        self._lamp("listening")

    def on_world_event(self, event: WorldEvent) -> None:
        while (not self.completed
               and step_complete(self.current_step.completion, self.world)):
            completed_step = self.current_step
            self.log.append("step_complete", self.clock.now(), step=completed_step.id)
            if self.step_index + 1 >= len(self.scenario.steps):
                self.completed = True
                return
            self.step_index += 1
            self._issue_step(self.current_step)

    # -- internals --------------------------------------------------------------

    def _issue_step(self, step: StepSpec) -> None:
        request = TaskRequest(step, self.clock.now())
        self.log.append("step_marker", request.issued_ts, step=step.id,
                        instruction=step.instruction_text)
        self.adapter.talker(step.instruction_text)
        if step.pointing_target is not None:
            self.adapter.executor("point", step.pointing_target)
        for listener in list(self.step_listeners):
            listener(step)

    def _snapshot(self) -> Snapshot:
        camera = self.world.find_camera(self.robot_camera_id)
        if camera is None:
            raise SessionStartupError(f"world has no camera {self.robot_camera_id!r}")
        world = self.world.at_clock(self.clock.now())
        detections = tuple(render_detections(camera, world, self.noise, self.seed))
        target = self.gaze_tracker.current()
        gazed_position = None
        if target.object_id is not None:
            obj = world.find_object(target.object_id)
            gazed_position = obj.position if obj is not None else None
        return Snapshot(
            detections=detections,
            caption=caption(world, camera),
            gaze_target=target,
            gazed_position=gazed_position,
            user_position=world.user.position,
        )

    def _set_state(self, state: LoopState) -> None:
        self.state = state

    def _lamp(self, state: str) -> None:
        self.adapter.set_state(state)

    def _log_action_event(self, event: ActionEvent) -> None:
        self.log.append("action_event", event.timestamp_ms, kind=event.kind,
                        body=dict(event.body), turn=self._current_turn)

    def _log_warning(self, message: str) -> None:
        self.log.append("warning", self.clock.now(), message=message, turn=self._current_turn)


def start_session(
    world: WorldState,
    scenario: ScenarioSpec,
    condition: str,
    backend: Backend,
    **kwargs,
) -> Session:
    """Build and start a session: step I is announced and the loop is listening."""
    session = Session(world, scenario, condition, backend, **kwargs)
    session.start()
    return session
