"""Fuse a finalized phrase with a perception snapshot into one record.

Fusion is speech-triggered: a FusedRecord exists only because a Phrase was
emitted.  All fields are plain values copied out of the snapshot taken at
finalization time, so later world changes cannot leak in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .geometry import Vec3
from .jsonutil import canonical, round3
from .perception import Detection, GazeTarget
from .scenario import StepSpec
from .speech import Phrase

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GazedObject:
    id: str
    category: str
    world_pos: tuple[float, float, float]
    dwell_ms: int


@dataclass(frozen=True)
class FusedRecord:
    utterance: str
    utterance_source: str
    gazed_object: GazedObject | None
    objects: tuple[tuple[str, tuple[float, float, float]], ...]  # (category, position)
    scene_caption: str
    user_position: tuple[float, float, float]
    current_step_id: str
    current_step_instruction: str
    timestamp_ms: int

    def __post_init__(self) -> None:
        if not self.utterance:
            raise ValueError("utterance must be non-empty")


@dataclass(frozen=True)
class Snapshot:
    """Perception state captured at the instant a phrase is finalized."""
    detections: tuple[Detection, ...]
    caption: str
    gaze_target: GazeTarget
    gazed_position: Vec3 | None
    user_position: Vec3


def _triple(v: Vec3) -> tuple[float, float, float]:
    return (round3(v.x), round3(v.y), round3(v.z))


def fuse(phrase: Phrase, snapshot: Snapshot, step: StepSpec) -> FusedRecord:
    """Build the interaction-state record for one finalized phrase."""
    if not phrase.finalized:
        raise ValueError("fusion requires a finalized phrase")
    gazed = None
    target = snapshot.gaze_target
    if target.object_id is not None and snapshot.gazed_position is not None:
        gazed = GazedObject(
            id=target.object_id,
            category=target.category or "",
            world_pos=_triple(snapshot.gazed_position),
            dwell_ms=target.dwell_ms,
        )
    return FusedRecord(
        utterance=phrase.text,
        utterance_source=phrase.source,
        gazed_object=gazed,
        objects=tuple((d.category, _triple(d.world_pos)) for d in snapshot.detections),
        scene_caption=snapshot.caption,
        user_position=_triple(snapshot.user_position),
        current_step_id=step.id,
        current_step_instruction=step.instruction_text,
        timestamp_ms=phrase.end_ts,
    )


def record_payload(record: FusedRecord) -> dict:
    gazed = None
    if record.gazed_object is not None:
        gazed = {
            "id": record.gazed_object.id,
            "category": record.gazed_object.category,
            "world_pos": list(record.gazed_object.world_pos),
            "dwell_ms": record.gazed_object.dwell_ms,
        }
    return {
        "utterance": record.utterance,
        "utterance_source": record.utterance_source,
        "gazed_object": gazed,
        "objects": [
            {"category": cat, "world_pos": list(pos)} for cat, pos in record.objects
        ],
        "scene_caption": record.scene_caption,
        "user_position": list(record.user_position),
        "current_step": {
            "id": record.current_step_id,
            "instruction_text": record.current_step_instruction,
        },
        "timestamp": record.timestamp_ms,
    }


def serialize(record: FusedRecord) -> str:
    """Canonical single-line JSON: sorted keys, 3-decimal floats, stable bytes."""
    return canonical(record_payload(record))


def parse(text: str) -> FusedRecord:
    """Inverse of serialize()."""
    doc = json.loads(text)
    gazed_raw = doc.get("gazed_object")
    gazed = None
    if gazed_raw is not None:
        gazed = GazedObject(
            id=gazed_raw["id"],
            category=gazed_raw["category"],
            world_pos=tuple(float(c) for c in gazed_raw["world_pos"]),
            dwell_ms=int(gazed_raw["dwell_ms"]),
        )
    return FusedRecord(
        utterance=doc["utterance"],
        utterance_source=doc.get("utterance_source", "user"),
        gazed_object=gazed,
        objects=tuple(
            (o["category"], tuple(float(c) for c in o["world_pos"]))
            for o in doc["objects"]
        ),
        scene_caption=doc["scene_caption"],
        user_position=tuple(float(c) for c in doc["user_position"]),
        current_step_id=doc["current_step"]["id"],
        current_step_instruction=doc["current_step"]["instruction_text"],
        timestamp_ms=int(doc["timestamp"]),
    )
