"""Prompt assembly, conversation state, backend querying, and response parsing.

The system prompt concatenates six template sections; section 4 is always
rendered live from the API catalog so the model only ever sees callable
functions.  Responses carry a THOUGHT section and a fenced PROGRAM section.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .backends import Backend, BackendError, BackendResult, estimate_tokens
from .catalog import ApiCatalog
from .fusion import FusedRecord, serialize
from .textutil import whitespace_tokens

COT_MARKER = "Let's think step by step"
THOUGHT_MARKER = "THOUGHT:"
PROGRAM_MARKER = "PROGRAM:"
FENCE_OPEN = "<<<"
FENCE_CLOSE = ">>>"
MAX_USER_TURNS = 64

_SECTION_NAMES = ("part1", "part2", "part3", "part4", "part5", "part6")


class PromptError(ValueError):
    """The template or catalog cannot produce a valid system prompt."""


class ParseFailure(ValueError):
    def __init__(self, reason: str, raw_response: str) -> None:
        super().__init__(reason)
        self.reason = reason
        self.raw_response = raw_response


class ConversationLimitError(RuntimeError):
    """The documented 64-turn session guard tripped."""


@dataclass(frozen=True)
class PromptTemplate:
    part1_setup: str
    part2_input_schema: str
    part3_task_cot: str
    part4_api_catalog: str
    part6_output_format: str
    part5_examples: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for label, text in (
            ("part1", self.part1_setup), ("part2", self.part2_input_schema),
            ("part3", self.part3_task_cot), ("part4", self.part4_api_catalog),
            ("part6", self.part6_output_format),
        ):
            if not text.strip():
                raise PromptError(f"{label} must be non-empty")
        if COT_MARKER not in self.part3_task_cot:
            raise PromptError(f"part3 must contain the literal sentence {COT_MARKER!r}")

    @classmethod
    def from_text(cls, text: str) -> "PromptTemplate":
        """Parse a template file: sections delimited by [[part1]] .. [[part6]] lines."""
        sections: dict[str, list[str]] = {}
        current: str | None = None
        for line in text.splitlines():
            stripped = line.strip()
            if stripped.startswith("[[") and stripped.endswith("]]"):
                name = stripped[2:-2]
                if name not in _SECTION_NAMES:
                    raise PromptError(f"unknown template section {name!r}")
                current = name
                sections[current] = []
                continue
            if current is not None:
                sections[current].append(line)
        missing = [n for n in _SECTION_NAMES if n != "part5" and n not in sections]
        if missing:
            raise PromptError(f"template is missing sections: {', '.join(missing)}")
        part5_text = "\n".join(sections.get("part5", ())).strip()
        examples = tuple(
            block.strip() for block in part5_text.split("\n---\n") if block.strip()
        ) if part5_text else ()
        return cls(
            part1_setup="\n".join(sections["part1"]).strip(),
            part2_input_schema="\n".join(sections["part2"]).strip(),
            part3_task_cot="\n".join(sections["part3"]).strip(),
            part4_api_catalog="\n".join(sections["part4"]).strip(),
            part6_output_format="\n".join(sections["part6"]).strip(),
            part5_examples=examples,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "PromptTemplate":
        return cls.from_text(Path(path).read_text("utf-8"))

    @classmethod
    def default(cls) -> "PromptTemplate":
        text = resources.files("hri_sim").joinpath("assets/default_prompt.txt").read_text("utf-8")
        return cls.from_text(text)


def build_system_prompt(template: PromptTemplate, catalog: ApiCatalog,
                        scenario_context: str = "") -> str:
    """Deterministic concatenation of sections 1..6 with a live-rendered catalog."""
    if len(catalog) == 0:
        raise PromptError("catalog must not be empty: an agent with no actions is invalid")
    rendered_catalog = "\n".join(catalog.render_lines())
    part4 = template.part4_api_catalog
    if "{{part4}}" in part4:
        part4 = part4.replace("{{part4}}", rendered_catalog)
    else:
        part4 = f"{part4}\n{rendered_catalog}"
    parts = [
        template.part1_setup,
        template.part2_input_schema,
        template.part3_task_cot,
        part4,
        "\n\n".join(template.part5_examples),
        template.part6_output_format,
    ]
    prompt = "\n\n".join(p for p in parts if p)
    return prompt.replace("{{scenario}}", scenario_context)


@dataclass
class Conversation:
    messages: list[dict] = field(default_factory=list)

    @classmethod
    def start(cls, system_prompt: str) -> "Conversation":
        return cls(messages=[{"role": "system", "content": system_prompt}])

    @property
    def token_estimate(self) -> int:
        return sum(whitespace_tokens(m["content"]) for m in self.messages)

    def append(self, role: str, content: str) -> None:
        if not self.messages:
            if role != "system":
                raise ValueError("the first message must be the system prompt")
        else:
            last = self.messages[-1]["role"]
            expected = "user" if last in ("system", "assistant") else "assistant"
            if role != expected:
                raise ValueError(f"expected a {expected} message after {last}, got {role}")
        self.messages.append({"role": role, "content": content})

    def user_turns(self) -> int:
        return sum(1 for m in self.messages if m["role"] == "user")


@dataclass(frozen=True)
class ReasoningOutput:
    cot_text: str
    program_source: str
    raw_response: str
    latency_ms: int
    prompt_tokens: int
    completion_tokens: int


def parse_response(raw: str) -> tuple[str, str]:
    """Extract (cot_text, program_source) from a THOUGHT/PROGRAM response."""
    if PROGRAM_MARKER not in raw:
        raise ParseFailure("missing PROGRAM section", raw)
    before, after = raw.split(PROGRAM_MARKER, 1)
    cot = ""
    if THOUGHT_MARKER in before:
        cot = before.split(THOUGHT_MARKER, 1)[1].strip()
    open_idx = after.find(FENCE_OPEN)
    if open_idx < 0:
        raise ParseFailure("program is not fenced with <<<", raw)
    close_idx = after.find(FENCE_CLOSE, open_idx + len(FENCE_OPEN))
    if close_idx < 0:
        raise ParseFailure("unbalanced program fences", raw)
    program = after[open_idx + len(FENCE_OPEN):close_idx].strip()
    return cot, program


def _ask(conv: Conversation, user_text: str, backend: Backend,
         wall_latency: bool) -> ReasoningOutput:
    if conv.user_turns() >= MAX_USER_TURNS:
        raise ConversationLimitError(f"conversation exceeded {MAX_USER_TURNS} user turns")
    conv.append("user", user_text)
    started = time.monotonic()
    try:
        result: BackendResult = backend.complete(list(conv.messages))
    except BackendError:
        # Keep roles alternating so the session can continue after recovery.
        conv.append("assistant", "(no response)")
        raise
    prompt_tokens = result.prompt_tokens
    if prompt_tokens is None:
        prompt_tokens = estimate_tokens(conv.messages)
    conv.append("assistant", result.raw_text)
    completion_tokens = result.completion_tokens
    if completion_tokens is None:
        completion_tokens = whitespace_tokens(result.raw_text)
    latency = result.wall_ms
    if wall_latency and latency == 0:
        latency = int((time.monotonic() - started) * 1000)
    cot, program = parse_response(result.raw_text)  # may raise ParseFailure
    return ReasoningOutput(
        cot_text=cot,
        program_source=program,
        raw_response=result.raw_text,
        latency_ms=latency,
        prompt_tokens=prompt_tokens,
        completion_tokens=completion_tokens,
    )


def query(conv: Conversation, record: FusedRecord, backend: Backend,
          wall_latency: bool = False) -> ReasoningOutput:
    """Send one fused record and parse the reply; the conversation grows by 2."""
    if not conv.messages or conv.messages[0]["role"] != "system":
        raise ValueError("conversation must start with the system prompt")
    return _ask(conv, serialize(record), backend, wall_latency)


def repair_once(conv: Conversation, reason: str, backend: Backend,
                wall_latency: bool = False) -> ReasoningOutput:
    """One retry after a failed output; a second failure propagates to the caller."""
    message = f"Your previous output failed: {reason}. Reply again in the required format."
    return _ask(conv, message, backend, wall_latency)
