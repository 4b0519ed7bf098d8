# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event queue: binary heap of C structs, payloads held in a slot list."""

from libc.math cimport isinf, INFINITY
from libc.stdlib cimport malloc, realloc, free

from .errors import SchedulingError


cdef struct Entry:
    double time
    long long seq
    long kind
    Py_ssize_t slot


cdef inline bint _less(Entry* a, Entry* b) noexcept nogil:
    if a.time < b.time:
        return True
    if a.time > b.time:
        return False
    return a.seq < b.seq


cdef class EventQueue:
    """Min-queue of ``(time, seq, kind, payload)`` popped in ``(time, seq)`` order.

    Same contract as the pure-Python queue in ``_equeue_py``.
    """

    cdef Entry* _heap
    cdef Py_ssize_t _size
    cdef Py_ssize_t _cap
    cdef long long _seq
    cdef list _payloads
    cdef list _free
    cdef public double now

    def __cinit__(self, start=0.0):
        self._cap = 1024
        self._heap = <Entry*> malloc(self._cap * sizeof(Entry))
        if self._heap == NULL:
            raise MemoryError()
        self._size = 0
        self._seq = 0
        self._payloads = []
        self._free = []
        self.now = float(start)

    def __dealloc__(self):
        if self._heap != NULL:
            free(self._heap)

    def __len__(self):
        return self._size

    @property
    def scheduled_count(self):
        return self._seq

    cdef void _grow(self) except *:
        cdef Py_ssize_t cap = self._cap * 2
        cdef Entry* h = <Entry*> realloc(self._heap, cap * sizeof(Entry))
        if h == NULL:
            raise MemoryError()
        self._heap = h
        self._cap = cap

    cpdef long long schedule(self, double time, long kind, object payload=None) except -1:
        cdef Py_ssize_t slot, i, parent
        cdef Entry e
        if not (time >= self.now) or isinf(time):
            raise SchedulingError(f"cannot schedule kind={kind} at t={time!r} (now={self.now!r})")
        if self._size == self._cap:
            self._grow()
        if self._free:
            slot = self._free.pop()
            self._payloads[slot] = payload
        else:
            slot = len(self._payloads)
            self._payloads.append(payload)
        e.time = time
        e.seq = self._seq
        e.kind = kind
        e.slot = slot
        self._seq += 1
        i = self._size
        self._size += 1
        while i > 0:
            parent = (i - 1) >> 1
            if _less(&e, &self._heap[parent]):
                self._heap[i] = self._heap[parent]
                i = parent
            else:
                break
        self._heap[i] = e
        return e.seq

    cpdef tuple pop(self):
        cdef Entry top, last
        cdef Py_ssize_t i, child, n
        if self._size == 0:
            raise IndexError("pop from empty event queue")
        top = self._heap[0]
        self._size -= 1
        n = self._size
        if n > 0:
            last = self._heap[n]
            i = 0
            while True:
                child = 2 * i + 1
                if child >= n:
                    break
                if child + 1 < n and _less(&self._heap[child + 1], &self._heap[child]):
                    child += 1
                if _less(&self._heap[child], &last):
                    self._heap[i] = self._heap[child]
                    i = child
                else:
                    break
            self._heap[i] = last
        payload = self._payloads[top.slot]
        self._payloads[top.slot] = None
        self._free.append(top.slot)
        self.now = top.time
        return (top.time, top.seq, top.kind, payload)

    def peek_time(self):
        if self._size == 0:
            return INFINITY
        return self._heap[0].time
