"""Word-by-word transcript stream with pause-based phrase finalization.

Words accumulate in an open buffer; a phrase is concluded only by time: once
the silence after the last accepted word reaches the configured gap, the
buffered words are emitted exactly once as a single Phrase.  Low-confidence
words are gated out before they reach the buffer.  Operator injections
bypass both the gate and the silence wait.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TranscriptEvent:
    timestamp_ms: int
    word: str
    confidence: float
    source: str = "user"  # user | operator

    def __post_init__(self) -> None:
        if not self.word.strip():
            raise ValueError("word must be non-empty after trimming")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError("confidence must be in [0, 1]")


@dataclass(frozen=True)
class Phrase:
    text: str
    start_ts: int
    end_ts: int
    source: str = "user"
    finalized: bool = True

    def __post_init__(self) -> None:
        if self.start_ts > self.end_ts:
            raise ValueError("start_ts must be <= end_ts")
        if not self.text:
            raise ValueError("phrase text must be non-empty")


@dataclass(frozen=True)
class SegmenterConfig:
    silence_gap_ms: int = 3000
    min_word_confidence: float = 0.5

    def __post_init__(self) -> None:
        if self.silence_gap_ms <= 0:
            raise ValueError("silence_gap_ms must be > 0")
        if not (0.0 <= self.min_word_confidence <= 1.0):
            raise ValueError("min_word_confidence must be in [0, 1]")


class OrderingError(ValueError):
    """An event arrived with a timestamp older than one already seen."""


class PhraseSegmenter:
    def __init__(self, config: SegmenterConfig | None = None) -> None:
        self.config = config or SegmenterConfig()
        self._buffer: list[str] = []
        self._first_word_ts: int | None = None
        self._last_word_ts: int | None = None
        self._last_seen_ts = -1
        self._last_tick_ts = -1

    @property
    def open_words(self) -> tuple[str, ...]:
        return tuple(self._buffer)

    @property
    def silence_deadline_ms(self) -> int | None:
        """Earliest time the open buffer could finalize, None when empty."""
        if self._last_word_ts is None:
            return None
        return self._last_word_ts + self.config.silence_gap_ms

    def push_word(self, ev: TranscriptEvent) -> Phrase | None:
        """Buffer an accepted word; finalization only ever happens in tick()."""
        if ev.timestamp_ms < self._last_seen_ts:
            raise OrderingError(
                f"timestamp {ev.timestamp_ms} precedes already-seen {self._last_seen_ts}"
            )
        self._last_seen_ts = ev.timestamp_ms
        if ev.confidence < self.config.min_word_confidence:
            return None
        if self._first_word_ts is None:
            self._first_word_ts = ev.timestamp_ms
        self._last_word_ts = ev.timestamp_ms
        self._buffer.append(ev.word.strip())
        return None

    def tick(self, now_ms: int) -> Phrase | None:
        """Emit the open phrase once the silence gap has elapsed (inclusive)."""
        if now_ms < self._last_tick_ts:
            raise OrderingError(f"tick time {now_ms} precedes previous tick {self._last_tick_ts}")
        self._last_tick_ts = now_ms
        if not self._buffer or self._last_word_ts is None:
            return None
        if now_ms - self._last_word_ts < self.config.silence_gap_ms:
            return None
        phrase = Phrase(
            text=" ".join(self._buffer),
            start_ts=self._first_word_ts if self._first_word_ts is not None else now_ms,
            end_ts=now_ms,
        )
        self._reset_buffer()
        return phrase

    def flush(self, now_ms: int) -> Phrase | None:
        """Finalize the open buffer immediately (explicit submission path)."""
        if not self._buffer:
            return None
        phrase = Phrase(
            text=" ".join(self._buffer),
            start_ts=self._first_word_ts if self._first_word_ts is not None else now_ms,
            end_ts=max(now_ms, self._first_word_ts or now_ms),
        )
        self._reset_buffer()
        return phrase

    def inject_operator_phrase(self, text: str, now_ms: int) -> Phrase:
        """Operator override: emits immediately and leaves the user buffer untouched."""
        if not text.strip():
            raise ValueError("operator phrase must be non-empty")
        return Phrase(text=text.strip(), start_ts=now_ms, end_ts=now_ms, source="operator")

    def _reset_buffer(self) -> None:
        self._buffer.clear()
        self._first_word_ts = None
        self._last_word_ts = None
