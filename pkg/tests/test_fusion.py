import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hri_sim.fusion import FusedRecord, GazedObject, Snapshot, fuse, parse, serialize
from hri_sim.geometry import Vec3
from hri_sim.perception import Detection, GazeTarget
from hri_sim.scenario import load_scenario
from hri_sim.speech import Phrase

from conftest import make_record


def _snapshot(detections=(), caption="A room with 0 objects.",
              gaze=GazeTarget(), gazed_pos=None, user=Vec3(1.0, 2.5, 0.0)):
    return Snapshot(
        detections=tuple(detections),
        caption=caption,
        gaze_target=gaze,
        gazed_position=gazed_pos,
        user_position=user,
    )


def _step(step_id="I", instruction="Do the thing."):
    _, spec = load_scenario("corridor6")
    for s in spec.steps:
        if s.id == step_id:
            return s
    raise KeyError(step_id)


def test_fuse_with_empty_snapshot():
    phrase = Phrase("hello robot", 100, 4000)
    record = fuse(phrase, _snapshot(), _step())
    assert record.objects == ()
    assert record.gazed_object is None
    assert record.utterance == "hello robot"
    assert record.timestamp_ms == 4000  # the phrase end is the snapshot time


def test_fuse_step_v_with_gaze_on_box(corridor6):
    world, spec = corridor6
    box = world.find_object("box_front")
    snapshot = _snapshot(
        detections=[Detection("box_front", "box", 1.0, (0, 0, 5, 5), box.position)],
        gaze=GazeTarget("box_front", "box", 420),
        gazed_pos=box.position,
    )
    record = fuse(Phrase("this one?", 0, 1000), snapshot, spec.steps[4])
    assert record.current_step_id == "V"
    assert record.gazed_object.category == "box"
    assert record.gazed_object.dwell_ms == 420
    assert record.objects == (("box", (7.7, 3.9, 0.8)),)


def test_snapshot_isolation_from_later_world_changes(corridor6):
    world, spec = corridor6
    tool = world.find_object("tool")
    snapshot = _snapshot(
        detections=[Detection("tool", "tool", 1.0, (0, 0, 5, 5), tool.position)],
    )
    record = fuse(Phrase("grab it", 0, 500), snapshot, spec.steps[0])
    before = record.objects[0][1]
    # "Move" the object afterwards; the record must not see it.
    from hri_sim.world import MoveTo, Pick, apply_user_action
    w, _ = apply_user_action(world, MoveTo(Vec3(4.0, 2.0, 0.0)))
    w, _ = apply_user_action(w, Pick("tool"))
    assert w.find_object("tool").position != tool.position
    assert record.objects[0][1] == before


def test_unfinalized_phrase_rejected():
    phrase = Phrase("text", 0, 10, finalized=False)
    with pytest.raises(ValueError):
        fuse(phrase, _snapshot(), _step())


def test_serialize_is_single_line_key_sorted():
    record = make_record()
    text = serialize(record)
    assert "\n" not in text
    doc = json.loads(text)
    assert list(doc.keys()) == sorted(doc.keys())
    assert set(doc.keys()) == {
        "current_step", "gazed_object", "objects", "scene_caption",
        "timestamp", "user_position", "utterance", "utterance_source",
    }


def test_serialize_formats_floats_with_three_decimals():
    record = make_record(objects=[("box", (1.0, 2.25, 0.0))])
    assert '"world_pos":[1.000,2.250,0.000]' in serialize(record)


def test_serialize_renders_missing_gaze_as_null():
    assert '"gazed_object":null' in serialize(make_record())


def test_equal_records_serialize_identically():
    a = make_record(objects=[("box", (1.0, 2.0, 0.0))])
    b = make_record(objects=[("box", (1.0, 2.0, 0.0))])
    assert a is not b
    assert serialize(a) == serialize(b)


def test_round_trip_example_with_gaze():
    record = make_record(
        objects=[("box", (7.7, 3.9, 0.8)), ("tool", (4.0, 0.9, 0.8))],
        gazed=GazedObject("box_front", "box", (7.7, 3.9, 0.8), 350),
    )
    assert parse(serialize(record)) == record


@settings(max_examples=80, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.sampled_from(["box", "tool", "tin can", "cube"]),
            st.tuples(
                st.floats(min_value=-50, max_value=50),
                st.floats(min_value=-50, max_value=50),
                st.floats(min_value=-5, max_value=5),
            ),
        ),
        max_size=6,
    ),
    st.text(alphabet="abc xyz?!.,", min_size=1, max_size=30).filter(str.strip),
    st.integers(min_value=0, max_value=10_000_000),
)
def test_serialize_parse_round_trip(objects, utterance, ts):
    # Route through fuse() so float fields are quantized to the serial grid.
    snapshot = _snapshot(
        detections=[
            Detection(None, cat, 1.0, (0, 0, 1, 1), Vec3(*pos)) for cat, pos in objects
        ],
        user=Vec3(1.234567, 2.5, 0.0),
    )
    record = fuse(Phrase(utterance, 0, ts), snapshot, _step())
    assert parse(serialize(record)) == record


def test_fusion_requires_nonempty_utterance():
    with pytest.raises(ValueError):
        FusedRecord(
            utterance="", utterance_source="user", gazed_object=None, objects=(),
            scene_caption="", user_position=(0, 0, 0), current_step_id="I",
            current_step_instruction="x", timestamp_ms=0,
        )
