"""Managed ML endpoint: pooled FCFS workers with lagged, backlog-driven scale-out."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..engine import EventKind
from ..records import Status
from .dedicated import WorkerPool
from .profiles import InstanceState, ManagedConfig


@dataclass(frozen=True)
class ScaleAction:
    time: float
    backlog: int
    desired: int
    current: int
    added: int
    ready_at: float


def managed_autoscale_step(now: float, backlog: int, active: int, config: ManagedConfig, pending: int = 0) -> ScaleAction:
    """Target-tracking on queue length; capacity is only ever added, after ``scale_up_delay``."""
    desired = max(config.min_instances, math.ceil(backlog / config.target_backlog_per_instance))
    if config.max_instances is not None:
        desired = min(desired, config.max_instances)
    current = active + pending
    added = max(0, desired - current)
    return ScaleAction(now, backlog, desired, current, added, now + config.scale_up_delay)


class ManagedPlatform(WorkerPool):
    kind = "managed"

    def __init__(self, sim, config: ManagedConfig, seed: int):
        super().__init__(sim, config.base, seed)
        self.managed = config
        self.pending = 0
        self.actions: list[ScaleAction] = []
        for _ in range(config.min_instances):
            self.add_instance(0.0)
        sim.on(EventKind.AUTOSCALE_TICK, self._tick)
        sim.on(EventKind.INSTANCE_WARM, self._ready)
        sim.schedule(config.tick_interval, EventKind.AUTOSCALE_TICK, None)

    @property
    def cold_starts(self) -> int:
        return 0

    @property
    def in_service(self) -> int:
        return sum(1 for i in self.instances if i.warm_at is not None)

    def on_arrival(self, now: float, inv) -> None:
        self.purge_expired(now)
        if len(self.queue) > self.managed.error_backlog_threshold:
            self.reject(inv, Status.BACKLOG_REJECTED)
            return
        self.server_dispatch(now, inv)

    def _tick(self, now: float, _payload) -> None:
        self.purge_expired(now)
        act = managed_autoscale_step(now, len(self.queue), self.in_service, self.managed, self.pending)
        self.actions.append(act)
        for _ in range(act.added):
            inst = InstanceState(len(self.instances), created_at=now, last_used=now)
            self.instances.append(inst)
            self.pending += 1
            # A warm-up landing after the last request must not stretch the run.
            self.sim.schedule(act.ready_at, EventKind.INSTANCE_WARM, inst.instance_id, keepalive=False)
        self.sim.schedule(now + self.managed.tick_interval, EventKind.AUTOSCALE_TICK, None)

    def _ready(self, now: float, iid: int) -> None:
        inst = self.instances[iid]
        inst.warm_at = now
        inst.last_used = now
        self.pending -= 1
        self.free.extend([iid] * self.config.workers)
        self._drain(now)

    def finish(self, end_time: float) -> None:
        pass
