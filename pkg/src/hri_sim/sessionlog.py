"""Append-only session log: newline-delimited JSON with stable field order."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class SessionLog:
    session_id: str
    condition: str
    seed: int
    records: list[dict] = field(default_factory=list)

    def append(self, tag: str, ts_ms: int, **body) -> dict:
        record = {
            "tag": tag,
            "ts": ts_ms,
            "session_id": self.session_id,
            "condition": self.condition,
            "seed": self.seed,
        }
        record.update(body)
        self.records.append(record)
        return record

    def tagged(self, *tags: str) -> list[dict]:
        return [r for r in self.records if r["tag"] in tags]

    def to_ndjson(self) -> str:
        return "\n".join(
            json.dumps(r, ensure_ascii=False, separators=(",", ":")) for r in self.records
        ) + ("\n" if self.records else "")

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_ndjson(), "utf-8")
        return path

    @classmethod
    def from_ndjson(cls, text: str) -> "SessionLog":
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not records:
            raise ValueError("empty session log")
        head = records[0]
        return cls(
            session_id=head["session_id"],
            condition=head["condition"],
            seed=head["seed"],
            records=records,
        )

    @classmethod
    def read(cls, path: str | Path) -> "SessionLog":
        return cls.from_ndjson(Path(path).read_text("utf-8"))
