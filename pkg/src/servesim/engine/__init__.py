"""Discrete-event core.

The event queue comes from the compiled ``_equeue`` extension when it is
importable and from the heapq implementation otherwise. Set
``SERVESIM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _equeue_py
from .errors import SchedulingError

BACKEND = "python"
EventQueue = _equeue_py.EventQueue
PyEventQueue = _equeue_py.EventQueue
CEventQueue = None

try:
    from ._equeue import EventQueue as CEventQueue  # type: ignore[no-redef]
except ImportError:  # extension not built
    CEventQueue = None

if CEventQueue is not None and os.environ.get("SERVESIM_PURE_PYTHON", "") in ("", "0"):
    EventQueue = CEventQueue
    BACKEND = "cython"

from .core import EventKind, SimClock, SimEvent, Simulation  # noqa: E402

__all__ = [
    "BACKEND",
    "CEventQueue",
    "EventKind",
    "EventQueue",
    "PyEventQueue",
    "SchedulingError",
    "SimClock",
    "SimEvent",
    "Simulation",
]
