"""Pure-Python event queue (heapq). Reference implementation of the compiled kernel."""

import heapq
import math

from .errors import SchedulingError


class EventQueue:
    """Min-queue of ``(time, seq, kind, payload)`` popped in ``(time, seq)`` order.

    ``seq`` is a per-queue insertion counter, so events at equal times pop
    first-in first-out. Popping advances ``now``; scheduling before ``now``
    raises :class:`SchedulingError`.
    """

    __slots__ = ("_heap", "_seq", "now")

    def __init__(self, start=0.0):
        self._heap = []
        self._seq = 0
        self.now = float(start)

    def __len__(self):
        return len(self._heap)

    @property
    def scheduled_count(self):
        return self._seq

    def schedule(self, time, kind, payload=None):
        time = float(time)
        if not time >= self.now or math.isinf(time):
            raise SchedulingError(f"cannot schedule kind={kind} at t={time!r} (now={self.now!r})")
        seq = self._seq
        self._seq = seq + 1
        heapq.heappush(self._heap, (time, seq, kind, payload))
        return seq

    def pop(self):
        if not self._heap:
            raise IndexError("pop from empty event queue")
        item = heapq.heappop(self._heap)
        self.now = item[0]
        return item

    def peek_time(self):
        return self._heap[0][0] if self._heap else math.inf
