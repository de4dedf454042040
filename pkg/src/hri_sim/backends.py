"""Pluggable response backends: scripted repetition, canned replay, remote HTTP."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import httpx

from .scenario import ScenarioSpec
from .textutil import whitespace_tokens

API_KEY_ENV = "HRI_LLM_KEY"


class BackendError(RuntimeError):
    """The backend could not produce a response (network, timeout, exhausted replay)."""


@dataclass(frozen=True)
class BackendConfig:
    kind: str  # remote | scripted | replay
    model_name: str = "sim-model"
    temperature: float = 0.0
    endpoint: str = ""
    timeout_ms: int = 30_000
    max_retries: int = 3

    def __post_init__(self) -> None:
        if self.kind not in ("remote", "scripted", "replay"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")


@dataclass(frozen=True)
class BackendResult:
    raw_text: str
    wall_ms: int = 0
    prompt_tokens: int | None = None      # None: caller estimates
    completion_tokens: int | None = None


class Backend(Protocol):
    kind: str

    def complete(self, messages: list[dict]) -> BackendResult: ...


def _program_response(thought: str, program: str) -> str:
    return f"THOUGHT:\n{thought}\nPROGRAM:\n<<<\n{program}\n>>>"


def _dsl_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


class ScriptedBackend:
    """Replays the predefined step instruction, verbatim, for any input.

    A pure function of the current step id; involves no model and no
    network, so token counts are reported as zero.
    """

    kind = "scripted"

    def __init__(self, scenario: ScenarioSpec, step_provider: Callable[[], str]) -> None:
        self._instructions = {s.id: s.instruction_text for s in scenario.steps}
        self._step_provider = step_provider

    def complete(self, messages: list[dict]) -> BackendResult:
        step_id = self._step_provider()
        instruction = self._instructions.get(step_id)
        if instruction is None:
            raise BackendError(f"no scripted instruction for step {step_id!r}")
        raw = _program_response("", f"activity.talker({_dsl_quote(instruction)})")
        return BackendResult(raw, prompt_tokens=0, completion_tokens=0)


class ReplayBackend:
    """Returns pre-recorded raw responses in order; exhaustion is an error."""

    kind = "replay"

    def __init__(self, responses: list[str]) -> None:
        self._responses = list(responses)
        self._index = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayBackend":
        responses = []
        for i, line in enumerate(Path(path).read_text("utf-8").splitlines()):
            if not line.strip():
                continue
            doc = json.loads(line)
            if not isinstance(doc, str):
                raise ValueError(f"{path}:{i + 1}: each replay line must be a JSON string")
            responses.append(doc)
        return cls(responses)

    def complete(self, messages: list[dict]) -> BackendResult:
        if self._index >= len(self._responses):
            raise BackendError("replay transcript exhausted")
        raw = self._responses[self._index]
        self._index += 1
        return BackendResult(raw)


def build_request_body(config: BackendConfig, messages: list[dict]) -> dict:
    """Chat-completions-style request body; temperature rides along explicitly."""
    return {
        "model": config.model_name,
        "temperature": config.temperature,
        "messages": [{"role": m["role"], "content": m["content"]} for m in messages],
    }


class RemoteBackend:
    """HTTP backend speaking a chat-completions wire format.

    The API key comes from the environment and is never logged or echoed.
    """

    kind = "remote"

    def __init__(self, config: BackendConfig, client: httpx.Client | None = None) -> None:
        if not config.endpoint:
            raise ValueError("remote backend requires an endpoint URL")
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout_ms / 1000.0)

    def complete(self, messages: list[dict]) -> BackendResult:
        body = build_request_body(self.config, messages)
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(API_KEY_ENV)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        last_error: Exception | None = None
        started = time.monotonic()
        for _ in range(max(1, self.config.max_retries)):
            try:
                response = self._client.post(self.config.endpoint, json=body, headers=headers)
                response.raise_for_status()
                doc = response.json()
                text = doc["choices"][0]["message"]["content"]
                usage = doc.get("usage", {})
                return BackendResult(
                    raw_text=text,
                    wall_ms=int((time.monotonic() - started) * 1000),
                    prompt_tokens=usage.get("prompt_tokens"),
                    completion_tokens=usage.get("completion_tokens"),
                )
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
        raise BackendError(f"remote backend failed after {self.config.max_retries} attempts: "
                           f"{last_error}") from last_error


def estimate_tokens(messages: list[dict]) -> int:
    return sum(whitespace_tokens(m["content"]) for m in messages)
