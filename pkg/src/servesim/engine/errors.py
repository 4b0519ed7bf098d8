class SchedulingError(RuntimeError):
    """An event was scheduled before the current virtual time (or at a non-finite time)."""
