"""Shared fixtures: the bundled scenario, record builders, step-driving helpers."""

from __future__ import annotations

import pytest

from hri_sim.fusion import FusedRecord
from hri_sim.geometry import CameraModel, Vec3
from hri_sim.scenario import load_scenario
from hri_sim.speech import TranscriptEvent
from hri_sim.world import MoveTo, Pick, Place


@pytest.fixture(scope="session")
def corridor6():
    return load_scenario("corridor6")


@pytest.fixture
def basic_camera():
    return CameraModel(
        id="cam", position=Vec3(0.0, 0.0, 0.0), yaw_deg=0.0, pitch_deg=0.0,
        h_fov_deg=90.0, v_fov_deg=60.0, width=640, height=480,
    )


def make_record(objects=(), utterance="hello", step_id="I",
                instruction="Do the thing.", gazed=None, ts=1000) -> FusedRecord:
    return FusedRecord(
        utterance=utterance,
        utterance_source="user",
        gazed_object=gazed,
        objects=tuple(objects),
        scene_caption="A room with 0 objects.",
        user_position=(1.0, 2.5, 0.0),
        current_step_id=step_id,
        current_step_instruction=instruction,
        timestamp_ms=ts,
    )


# Action sequences that complete each corridor6 step from the previous one.
CORRIDOR6_STEP_ACTIONS = {
    "I": [Pick("tin_can"), MoveTo(Vec3(9.3, 2.5, 0.0)), Place("forks")],
    "II": [MoveTo(Vec3(4.0, 2.0, 0.0))],
    "III": [Pick("tool")],
    "IV": [MoveTo(Vec3(8.0, 3.0, 0.0))],
    "V": [Place("box_front")],
    "VI": [MoveTo(Vec3(1.0, 2.5, 0.0))],
}


def drive_until_step(session, target_step_id: str) -> None:
    """Perform user actions until the session's current step is the target."""
    order = [s.id for s in session.scenario.steps]
    while session.current_step.id != target_step_id and not session.completed:
        step_id = session.current_step.id
        for action in CORRIDOR6_STEP_ACTIONS[step_id]:
            session.user_action(action)
        assert session.current_step.id != step_id or session.completed, (
            f"step {step_id} did not complete"
        )
        if order.index(session.current_step.id) > order.index(target_step_id):
            raise AssertionError(f"overshot {target_step_id}")


def feed_phrase(session, text: str, word_conf: float = 0.9) -> None:
    """Stream a phrase word by word and let the silence rule finalize it."""
    t0 = session.clock.now()
    words = text.split()
    for i, word in enumerate(words):
        session.push_word(TranscriptEvent(t0 + i * 300, word, word_conf))
    last = t0 + (len(words) - 1) * 300
    session.clock.advance_to(last + session.segmenter.config.silence_gap_ms)
    session.check_silence()
