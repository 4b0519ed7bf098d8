"""Scenario driver: workload -> platform model -> event loop -> records and cost."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import analysis, billing
from .engine import EventKind, Simulation
from .platforms import DedicatedPlatform, ManagedPlatform, ServerlessPlatform
from .records import RequestRecord
from .scenario import ScenarioSpec
from .workload import build_invocations, generate_arrivals, state_path


class ConfigurationError(ValueError):
    """The scenario cannot be simulated as configured."""


@dataclass
class RunResult:
    spec: ScenarioSpec
    records: list[RequestRecord]
    instances: list
    event_count: int
    end_time: float
    duration: float
    cost: float
    cold_starts: int
    segments: list = field(default_factory=list)
    sim: Simulation | None = None
    platform: object = None

    @property
    def invocations(self) -> int:
        return len({r.invocation_id for r in self.records})

    def report(self) -> analysis.MetricsReport:
        out = self.spec.output
        return analysis.build_report(
            self.records,
            self.instances,
            self.cost,
            self.duration,
            cold_starts=self.cold_starts,
            latency_bucket=out.latency_bucket,
            instance_bucket=out.instance_bucket,
            label=self.spec.name,
            workload=self.spec.workload_label,
        )


def check_config(spec: ScenarioSpec) -> None:
    if spec.platform in ("dedicated", "managed"):
        cfg = spec.dedicated if spec.platform == "dedicated" else spec.managed.base
        if cfg.queue_capacity == 0 and cfg.workers < 1:
            raise ConfigurationError("platform: zero-capacity server")


def build_platform(spec: ScenarioSpec, sim: Simulation):
    seed = spec.workload.seed
    if spec.platform == "serverless":
        return ServerlessPlatform(sim, spec.model, spec.runtime, spec.cold_start, spec.serverless, seed)
    if spec.platform == "managed":
        return ManagedPlatform(sim, spec.managed, seed)
    return DedicatedPlatform(sim, spec.dedicated, seed)


def run_scenario(spec: ScenarioSpec, queue_factory=None, keep_sim: bool = False) -> RunResult:
    """Simulate one scenario; identical specs (including seed) give identical results."""
    check_config(spec)
    events = generate_arrivals(spec.workload)
    invocations = build_invocations(spec.workload, events)

    sim = Simulation(queue_factory=queue_factory, trace=spec.output.trace)
    platform = build_platform(spec, sim)

    it = iter(invocations)

    def on_arrival(now, inv):
        # Arrivals are chained one at a time so the queue stays small.
        nxt = next(it, None)
        if nxt is not None:
            sim.schedule(nxt.arrival_time, EventKind.REQUEST_ARRIVAL, nxt)
        platform.on_arrival(now, inv)

    sim.on(EventKind.REQUEST_ARRIVAL, on_arrival)
    first = next(it, None)
    if first is not None:
        sim.schedule(first.arrival_time, EventKind.REQUEST_ARRIVAL, first)
    sim.schedule(spec.workload.duration, EventKind.WORKLOAD_END, None)
    sim.run()

    duration = max(spec.workload.duration, sim.end_time)
    platform.finish(duration)
    records = sorted(platform.records, key=lambda r: r.request_id)
    if len(records) != len(events):
        raise RuntimeError(f"request conservation violated: {len(records)} records for {len(events)} requests")
    cost = price(spec, records, platform.instances, duration)
    return RunResult(
        spec=spec,
        records=records,
        instances=platform.instances,
        event_count=sim.event_count,
        end_time=sim.end_time,
        duration=duration,
        cost=cost,
        cold_starts=platform.cold_starts,
        segments=state_path(spec.workload),
        sim=sim if keep_sim or spec.output.trace else None,
        platform=platform if keep_sim else None,
    )


def price(spec: ScenarioSpec, records, instances, duration: float) -> float:
    if spec.platform == "serverless":
        return billing.serverless_cost(records, spec.serverless.memory_gb, spec.pricing)
    if spec.platform == "managed":
        return billing.managed_service_cost(instances, spec.pricing, duration)
    return billing.dedicated_server_cost(duration, spec.pricing)
