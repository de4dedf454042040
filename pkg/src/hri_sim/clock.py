"""Time sources: virtual (headless, deterministic) and wall (interactive)."""

from __future__ import annotations

import heapq
import time
from typing import Callable, Protocol


class TimeSource(Protocol):
    def now(self) -> int: ...
    def advance_to(self, t_ms: int) -> None: ...


class VirtualClock:
    """Monotone counter advanced explicitly by the session scheduler."""

    def __init__(self, start_ms: int = 0) -> None:
        self._now = start_ms

    def now(self) -> int:
        return self._now

    def advance_to(self, t_ms: int) -> None:
        if t_ms > self._now:
            self._now = t_ms


class WallClock:
    """Real time; advance_to never sleeps, durations are informational."""

    def __init__(self) -> None:
        self._origin = time.monotonic()

    def now(self) -> int:
        return int((time.monotonic() - self._origin) * 1000)

    def advance_to(self, t_ms: int) -> None:
        pass


class EventQueue:
    """Deterministic agenda of timed callbacks over a virtual clock.

    Callbacks scheduled in the past run at the current time; the clock
    never rewinds.  Ties break by insertion order.
    """

    def __init__(self, clock: TimeSource) -> None:
        self.clock = clock
        self._heap: list[tuple[int, int, Callable[[], None]]] = []
        self._seq = 0

    def schedule(self, t_ms: int, fn: Callable[[], None]) -> None:
        heapq.heappush(self._heap, (max(t_ms, self.clock.now()), self._seq, fn))
        self._seq += 1

    def __len__(self) -> int:
        return len(self._heap)

    def run_next(self) -> bool:
        if not self._heap:
            return False
        t_ms, _, fn = heapq.heappop(self._heap)
        self.clock.advance_to(t_ms)
        fn()
        return True

    def run_all(self, stop: Callable[[], bool] | None = None, max_events: int = 1_000_000) -> None:
        for _ in range(max_events):
            if stop is not None and stop():
                return
            if not self.run_next():
                return
        raise RuntimeError("event queue did not drain within the event limit")
