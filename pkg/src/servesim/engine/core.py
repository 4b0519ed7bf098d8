"""Virtual clock, typed events and the sequential run loop."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Any, Callable


class EventKind(enum.IntEnum):
    REQUEST_ARRIVAL = 0
    INSTANCE_WARM = 1
    SERVICE_COMPLETE = 2
    AUTOSCALE_TICK = 3
    IDLE_REAP = 4
    WORKLOAD_END = 5


# Periodic bookkeeping events. They never keep a run alive on their own:
# once only these remain in the queue the run is over.
HOUSEKEEPING = frozenset({EventKind.AUTOSCALE_TICK, EventKind.IDLE_REAP})

TRACE_HEADER = ["time_s", "sequence", "kind", "detail"]


@dataclass(frozen=True, slots=True)
class SimEvent:
    time: float
    sequence: int
    kind: EventKind
    payload: Any = None


class SimClock:
    """Read-only view of a queue's virtual time."""

    __slots__ = ("_queue",)

    def __init__(self, queue):
        self._queue = queue

    @property
    def now(self) -> float:
        return self._queue.now


Handler = Callable[[float, Any], None]


class Simulation:
    """One sequential discrete-event run.

    Handlers are registered per :class:`EventKind` and receive ``(time, payload)``.
    ``run`` pops events in ``(time, sequence)`` order until no live
    (non-housekeeping) event is pending.
    """

    def __init__(self, queue_factory=None, trace: bool = False):
        if queue_factory is None:
            from . import EventQueue as queue_factory
        self.queue = queue_factory()
        self.clock = SimClock(self.queue)
        self.handlers: dict[int, Handler] = {}
        self.event_count = 0
        self.end_time = 0.0
        self._live = 0
        self._flipped: set[int] = set()
        self._trace: list[tuple] | None = [] if trace else None

    @property
    def now(self) -> float:
        return self.queue.now

    def on(self, kind: EventKind, handler: Handler) -> None:
        self.handlers[int(kind)] = handler

    def schedule(self, time: float, kind: EventKind, payload: Any = None, keepalive: bool | None = None) -> int:
        """Enqueue an event. ``keepalive`` overrides whether it keeps the run going."""
        seq = self.queue.schedule(time, int(kind), payload)
        default = kind not in HOUSEKEEPING
        live = default if keepalive is None else keepalive
        if live != default:
            self._flipped.add(seq)
        if live:
            self._live += 1
        return seq

    def pending(self) -> int:
        return len(self.queue)

    def run(self, stop: Callable[[], bool] | None = None) -> int:
        """Process events; returns the number handled in this call."""
        queue = self.queue
        handlers = self.handlers
        trace = self._trace
        handled = 0
        housekeeping = {int(k) for k in HOUSEKEEPING}
        while self._live > 0 and len(queue):
            time, seq, kind, payload = queue.pop()
            live = kind not in housekeeping
            if self._flipped and seq in self._flipped:
                self._flipped.discard(seq)
                live = not live
            if live:
                self._live -= 1
            if trace is not None:
                trace.append((time, seq, EventKind(kind).name, payload))
            handler = handlers.get(kind)
            if handler is not None:
                handler(time, payload)
            handled += 1
            self.end_time = time
            if stop is not None and stop():
                break
        self.event_count += handled
        return handled

    def events(self) -> list[SimEvent]:
        """Trace as :class:`SimEvent` values (empty unless tracing was enabled)."""
        return [SimEvent(t, s, EventKind[k], p) for t, s, k, p in (self._trace or [])]

    def write_trace(self, path) -> None:
        if self._trace is None:
            raise RuntimeError("tracing was not enabled for this run")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for t, s, k, p in self._trace:
                w.writerow([f"{t:.9f}", s, k, _detail(p)])


def _detail(payload) -> str:
    if payload is None:
        return ""
    ident = getattr(payload, "invocation_id", None)
    if ident is not None:
        return f"invocation={ident}"
    ident = getattr(payload, "instance_id", None)
    if ident is not None:
        return f"instance={ident}"
    return str(payload)
