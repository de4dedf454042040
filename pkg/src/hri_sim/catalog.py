"""Robot API catalog: the closed set of `activity.*` calls a program may make."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ApiParam:
    name: str
    type: str  # text | number | object_ref | none
    required: bool = True


@dataclass(frozen=True)
class ApiSignature:
    name: str                      # fully qualified, e.g. "activity.talker"
    params: tuple[ApiParam, ...]
    doc: str                       # one line, rendered into the prompt

    @property
    def min_arity(self) -> int:
        return sum(1 for p in self.params if p.required)

    @property
    def max_arity(self) -> int:
        return len(self.params)

    def render(self) -> str:
        args = ", ".join(
            p.name if p.required else f"{p.name}?" for p in self.params
        )
        return f"{self.name}({args}): {self.doc}"


@dataclass(frozen=True)
class ApiCatalog:
    signatures: tuple[ApiSignature, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        names = [s.name for s in self.signatures]
        if len(names) != len(set(names)):
            raise ValueError("catalog signature names must be unique")

    def __len__(self) -> int:
        return len(self.signatures)

    def lookup(self, name: str) -> ApiSignature | None:
        for sig in self.signatures:
            if sig.name == name:
                return sig
        return None

    def render_lines(self) -> list[str]:
        return [sig.render() for sig in self.signatures]


def default_catalog() -> ApiCatalog:
    return ApiCatalog((
        ApiSignature("activity.talker", (ApiParam("text", "text"),),
                     "speak the given text aloud; long input is trimmed to two sentences"),
        ApiSignature("activity.executor",
                     (ApiParam("gesture", "text"), ApiParam("target", "object_ref", required=False)),
                     "run a gesture from the gesture catalog, optionally aimed at a target id"),
        ApiSignature("activity.nod", (), "make a short confirmation nod"),
        ApiSignature("activity.shake_head", (), "shake the head to signal refusal"),
        ApiSignature("activity.point", (ApiParam("target", "object_ref"),),
                     "point toward the object or zone with the given id"),
        ApiSignature("activity.plan", (ApiParam("goal", "text"),),
                     "hand a navigation goal to the low-level planner"),
        ApiSignature("activity.think_step_by_step", (ApiParam("text", "text"),),
                     "record intermediate reasoning; performs no robot action"),
    ))
