"""FCFS worker pools: the dedicated server and the building block of managed endpoints."""

from __future__ import annotations

import math
from collections import deque

from .. import rng as rngmod
from ..engine import EventKind
from ..records import Status, sample_records
from .profiles import DedicatedServerConfig, InstanceState


class WorkerPool:
    """First-come first-served queue in front of a set of worker slots.

    Each free slot is represented by the id of the instance that owns it, so
    pools can span several instances. Requests whose queueing wait exceeds the
    client timeout are dropped from the head of the queue when a worker (or a
    new arrival) reaches them.
    """

    def __init__(self, sim, config: DedicatedServerConfig, seed: int):
        self.sim = sim
        self.config = config
        self.queue: deque = deque()
        self.free: list[int] = []
        self.busy = 0
        self.records: list = []
        self.instances: list[InstanceState] = []
        self.rng = rngmod.stream(seed, rngmod.SERVICE)
        self.peak_queue = 0
        sim.on(EventKind.SERVICE_COMPLETE, self._complete)

    # capacity ---------------------------------------------------------
    def add_instance(self, now: float, created_at: float | None = None) -> InstanceState:
        inst = InstanceState(len(self.instances), created_at=now if created_at is None else created_at, warm_at=now, last_used=now)
        self.instances.append(inst)
        self.free.extend([inst.instance_id] * self.config.workers)
        self._drain(now)
        return inst

    @property
    def backlog(self) -> int:
        return len(self.queue)

    # request path -----------------------------------------------------
    def service_time(self, batch: int) -> float:
        base = self.config.service_time
        if self.config.service_distribution == "exponential":
            return float(sum(self.rng.exponential(base) for _ in range(batch)))
        return batch * base

    def purge_expired(self, now: float) -> None:
        timeout = self.config.request_timeout
        q = self.queue
        while q and now - q[0].arrival_time > timeout:
            inv = q.popleft()
            self.records.extend(sample_records(inv, None, Status.TIMEOUT))

    def reject(self, inv, status: Status) -> None:
        self.records.extend(sample_records(inv, None, status))

    def server_dispatch(self, now: float, inv) -> None:
        self.purge_expired(now)
        if self.free and not self.queue:
            self._start(now, inv, self.free.pop())
            return
        cap = self.config.queue_capacity
        if cap is not None and len(self.queue) >= cap:
            self.reject(inv, Status.QUEUE_OVERFLOW)
            return
        self.queue.append(inv)
        if len(self.queue) > self.peak_queue:
            self.peak_queue = len(self.queue)

    on_arrival = server_dispatch

    def _start(self, now: float, inv, slot: int) -> None:
        self.busy += 1
        done = now + self.service_time(inv.batch_count) + self.config.network_overhead
        inst = self.instances[slot]
        if done > inst.busy_until:
            inst.busy_until = done
        self.sim.schedule(done, EventKind.SERVICE_COMPLETE, (inv, slot))

    def _complete(self, now: float, payload) -> None:
        inv, slot = payload
        self.busy -= 1
        inst = self.instances[slot]
        inst.last_used = now
        inst.requests_served += 1
        self.records.extend(sample_records(inv, now, Status.SUCCESS, instance_id=slot))
        self.free.append(slot)
        self._drain(now)

    def _drain(self, now: float) -> None:
        timeout = self.config.request_timeout
        while self.free and self.queue:
            inv = self.queue.popleft()
            if now - inv.arrival_time > timeout:
                self.records.extend(sample_records(inv, None, Status.TIMEOUT))
                continue
            self._start(now, inv, self.free.pop())


class DedicatedPlatform(WorkerPool):
    """A single always-on server with ``workers`` parallel slots."""

    kind = "dedicated"

    def __init__(self, sim, config: DedicatedServerConfig, seed: int):
        super().__init__(sim, config, seed)
        self.add_instance(0.0)

    @property
    def cold_starts(self) -> int:
        return 0

    def finish(self, end_time: float) -> None:
        pass


def mm1_mean_sojourn(arrival_rate: float, service_rate: float) -> float:
    """Closed-form M/M/1 mean time in system, ``1 / (mu - lambda)``."""
    if arrival_rate >= service_rate:
        return math.inf
    return 1.0 / (service_rate - arrival_rate)
