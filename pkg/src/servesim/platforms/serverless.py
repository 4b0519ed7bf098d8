"""Serverless (FaaS) fleet: on-demand instances, LIFO warm reuse, idle reaping."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

from .. import rng as rngmod
from ..engine import EventKind
from ..records import Status, sample_records
from .coldstart import billed_cold_duration, cold_start_duration, memory_factor, predict_component
from .profiles import ColdStartProfile, InstanceState, ModelProfile, RuntimeProfile, ServerlessConfig


@dataclass
class Fleet:
    """Instance bookkeeping for one serverless function.

    ``idle`` holds fully idle on-demand instances ordered by ``last_used``, so
    the newest is reused first (right end) and the oldest expires first
    (left end). Provisioned instances idle on their own stack and are never
    reaped. ``partial`` holds warm instances that are busy but still have a
    free concurrency slot.
    """

    concurrency: int = 1
    instances: list = field(default_factory=list)
    active: list = field(default_factory=list)
    idle: deque = field(default_factory=deque)
    provisioned_idle: list = field(default_factory=list)
    partial: list = field(default_factory=list)
    created_on_demand: int = 0
    retired: int = 0

    @property
    def created(self) -> int:
        return len(self.instances)

    @property
    def live(self) -> int:
        return self.created - self.retired

    def spawn(self, now: float, provisioned: bool = False) -> int:
        iid = len(self.instances)
        self.instances.append(InstanceState(iid, created_at=now, last_used=now, provisioned=provisioned))
        self.active.append(0)
        if not provisioned:
            self.created_on_demand += 1
        return iid

    def take(self) -> int | None:
        """Claim a concurrency slot on a warm instance, or ``None`` if none is free."""
        if self.partial:
            iid = self.partial[-1]
            self.active[iid] += 1
            if self.active[iid] >= self.concurrency:
                self.partial.pop()
            return iid
        if self.provisioned_idle:
            iid = self.provisioned_idle.pop()
        elif self.idle:
            iid = self.idle.pop()
        else:
            return None
        self.active[iid] = 1
        if self.concurrency > 1:
            self.partial.append(iid)
        return iid

    def release(self, iid: int, now: float) -> bool:
        """Free one slot; returns True when the instance became fully idle."""
        inst = self.instances[iid]
        inst.last_used = now
        was_full = self.active[iid] >= self.concurrency
        self.active[iid] -= 1
        if self.active[iid] > 0:
            if was_full:
                self.partial.append(iid)
            return False
        if self.concurrency > 1 and not was_full:
            self.partial.remove(iid)
        self._park(iid)
        return True

    def make_idle(self, iid: int, now: float) -> None:
        """Put a freshly warmed, never-used instance into the idle pool."""
        inst = self.instances[iid]
        inst.last_used = now
        self._park(iid)

    def _park(self, iid: int) -> None:
        if self.instances[iid].provisioned:
            self.provisioned_idle.append(iid)
        else:
            self.idle.append(iid)

    def retire(self, iid: int, now: float) -> None:
        inst = self.instances[iid]
        if inst.retired_at is not None:
            return
        inst.retired_at = now
        self.retired += 1

    def oldest_idle_expiry(self, idle_timeout: float) -> float:
        if not self.idle or math.isinf(idle_timeout):
            return math.inf
        return self.instances[self.idle[0]].last_used + idle_timeout


@dataclass(frozen=True)
class Route:
    instance_id: int
    cold: bool
    spawned: tuple = ()


def provisioned_pool_init(config: ServerlessConfig, now: float = 0.0) -> Fleet:
    if config.provisioned_concurrency < 0:
        raise ValueError(f"provisioned_concurrency: must be >= 0, got {config.provisioned_concurrency}")
    fleet = Fleet(concurrency=config.per_instance_concurrency)
    for _ in range(config.provisioned_concurrency):
        iid = fleet.spawn(now, provisioned=True)
        fleet.instances[iid].warm_at = now
        fleet.make_idle(iid, now)
    return fleet


def serverless_dispatch(now: float, fleet: Fleet, config: ServerlessConfig) -> Route:
    """Route to a warm slot if one is free, otherwise spawn new instance(s)."""
    iid = fleet.take()
    if iid is not None:
        return Route(iid, False)
    k = max(1, math.ceil(config.spawn_factor - 1e-12))
    ids = [fleet.spawn(now) for _ in range(k)]
    fleet.active[ids[0]] = 1
    if fleet.concurrency > 1:
        fleet.partial.append(ids[0])
    return Route(ids[0], True, tuple(ids[1:]))


def serverless_reap_idle(fleet: Fleet, now: float, idle_timeout: float) -> list[InstanceState]:
    """Retire on-demand instances idle for at least ``idle_timeout``."""
    out = []
    if math.isinf(idle_timeout):
        return out
    while fleet.idle:
        inst = fleet.instances[fleet.idle[0]]
        if inst.last_used + idle_timeout > now:
            break
        fleet.idle.popleft()
        fleet.retire(inst.instance_id, now)
        out.append(inst)
    return out


class ServerlessPlatform:
    kind = "serverless"

    def __init__(
        self,
        sim,
        model: ModelProfile,
        runtime: RuntimeProfile,
        cold: ColdStartProfile,
        config: ServerlessConfig,
        seed: int,
    ):
        self.sim = sim
        self.model = model
        self.runtime = runtime
        self.cold = cold
        self.config = config
        self.rng = rngmod.stream(seed, rngmod.COLD_START)
        self._cold_runtime = runtime
        self._cold_extra = model.predict_cold_extra
        if config.scale_cold_with_memory:
            mf = memory_factor(config, model)
            self._cold_runtime = replace(
                runtime,
                import_time=runtime.import_time * mf,
                load_time=runtime.load_time * mf,
                load_time_per_mb=runtime.load_time_per_mb * mf,
            )
            self._cold_extra = model.predict_cold_extra * mf
        self.fleet = provisioned_pool_init(config)
        self.records: list = []
        self._reap_at = math.inf
        self.in_flight = 0
        self.peak_in_flight = 0
        sim.on(EventKind.SERVICE_COMPLETE, self._complete)
        sim.on(EventKind.INSTANCE_WARM, self._warm)
        sim.on(EventKind.IDLE_REAP, self._reap)

    @property
    def instances(self) -> list[InstanceState]:
        return self.fleet.instances

    @property
    def cold_starts(self) -> int:
        return self.fleet.created_on_demand

    def _predict(self, batch: int) -> float:
        return predict_component(self.model, self.runtime, self.config, self.config.n_inferences, batch)

    def _cold_stages(self, batch: int):
        pred = self._predict(batch) + self._cold_extra
        return cold_start_duration(
            self.model, self._cold_runtime, self.cold, self.config.extra_download_bytes, self.rng, predict=pred
        )

    def on_arrival(self, now: float, inv) -> None:
        route = serverless_dispatch(now, self.fleet, self.config)
        inst = self.fleet.instances[route.instance_id]
        self.in_flight += 1
        self.peak_in_flight = max(self.peak_in_flight, self.in_flight)
        if route.cold:
            total, stages = self._cold_stages(inv.batch_count)
            done = now + total
            inst.warm_at = done - stages["predict"]
            inst.cold_starts_served += 1
            payload = (inv, route.instance_id, True, stages, stages["predict"], billed_cold_duration(stages))
            for extra in route.spawned:
                t_extra, _ = self._cold_stages(1)
                self.sim.schedule(now + t_extra, EventKind.INSTANCE_WARM, extra)
        else:
            pred = self._predict(inv.batch_count)
            done = now + self.config.network_overhead + pred
            payload = (inv, route.instance_id, False, None, pred, pred)
        inst.busy_until = max(inst.busy_until, done)
        self.sim.schedule(done, EventKind.SERVICE_COMPLETE, payload)

    def _complete(self, now: float, payload) -> None:
        inv, iid, cold, stages, pred, billed = payload
        self.in_flight -= 1
        inst = self.fleet.instances[iid]
        inst.requests_served += 1
        self.records.extend(
            sample_records(
                inv, now, Status.SUCCESS,
                cold=cold, stage_breakdown=stages, predict_time=pred,
                billed_duration=billed, instance_id=iid,
            )
        )
        if self.fleet.release(iid, now):
            self._arm_reaper()

    def _warm(self, now: float, iid: int) -> None:
        inst = self.fleet.instances[iid]
        inst.warm_at = now
        self.fleet.make_idle(iid, now)
        self._arm_reaper()

    def _arm_reaper(self) -> None:
        due = self.fleet.oldest_idle_expiry(self.config.idle_timeout)
        if due < self._reap_at:
            self._reap_at = due
            self.sim.schedule(due, EventKind.IDLE_REAP, None)

    def _reap(self, now: float, _payload) -> None:
        if now < self._reap_at:
            return  # superseded by an earlier reap that already ran
        self._reap_at = math.inf
        serverless_reap_idle(self.fleet, now, self.config.idle_timeout)
        self._arm_reaper()

    def finish(self, end_time: float) -> None:
        pass
