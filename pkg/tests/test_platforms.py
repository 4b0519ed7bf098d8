import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from servesim import scenario
from servesim.engine import EventKind, Simulation
from servesim.platforms import (
    ColdStartProfile,
    DedicatedPlatform,
    DedicatedServerConfig,
    Fleet,
    ManagedConfig,
    ManagedPlatform,
    ModelProfile,
    RuntimeProfile,
    ServerlessConfig,
    ServerlessPlatform,
    billed_cold_duration,
    cold_start_duration,
    managed_autoscale_step,
    memory_factor,
    mm1_mean_sojourn,
    predict_component,
    provisioned_pool_init,
    serverless_dispatch,
    serverless_reap_idle,
    warm_service_time,
)
from servesim.platforms.coldstart import STAGES
from servesim.records import Status
from servesim.workload import Invocation

MODEL = ModelProfile("m", artifact_bytes=10e6, predict_warm=0.05, predict_cold_extra=0.5)
RUNTIME = RuntimeProfile("rt", import_time=2.0, load_time=1.0)
COLD = ColdStartProfile(container_overhead=1.0, download_bandwidth=10e6)
COLD_TOTAL = 1.0 + 2.0 + 1.0 + 1.0 + 0.05 + 0.5


def inv(i, t, client=0, batch=1):
    ids = tuple(range(i * batch, i * batch + batch))
    return Invocation(i, client, t, ids, (t,) * batch)


def drive(platform_cls, arrivals, *args):
    sim = Simulation()
    plat = platform_cls(sim, *args)
    for x in arrivals:
        sim.schedule(x.arrival_time, EventKind.REQUEST_ARRIVAL, x)
    sim.on(EventKind.REQUEST_ARRIVAL, lambda now, x: plat.on_arrival(now, x))
    sim.run()
    return plat, sim


def serverless(arrivals, config=ServerlessConfig(network_overhead=0.01), model=MODEL, runtime=RUNTIME, cold=COLD):
    return drive(ServerlessPlatform, arrivals, model, runtime, cold, config, 0)[0]


# cold-start stage arithmetic -------------------------------------------------


def test_cold_start_stage_sum():
    total, stages = cold_start_duration(MODEL, RUNTIME, COLD)
    assert list(stages) == list(STAGES)
    assert total == pytest.approx(COLD_TOTAL)
    assert math.fsum(stages.values()) == total
    assert billed_cold_duration(stages) == pytest.approx(COLD_TOTAL - 1.0)


def test_all_zero_profile_is_instant():
    model = ModelProfile("z", artifact_bytes=1.0, packed_in_image=True)
    total, stages = cold_start_duration(model, RuntimeProfile("z"), ColdStartProfile())
    assert total == 0.0
    assert set(stages.values()) == {0.0}


def test_packed_model_skips_download():
    packed = ModelProfile("m", artifact_bytes=500e6, packed_in_image=True)
    _, stages = cold_start_duration(packed, RUNTIME, COLD)
    assert stages["download"] == 0.0
    _, stages = cold_start_duration(packed, RUNTIME, COLD, extra_download_bytes=20e6)
    assert stages["download"] == pytest.approx(2.0)


@pytest.mark.parametrize("cloud,seconds", [("aws", 2.39), ("gcp", 10.06)])
def test_extra_300mb_download(cloud, seconds):
    spec = scenario.preset(f"{cloud}-tf-mobilenet-w120")
    base, _ = cold_start_duration(spec.model, spec.runtime, spec.cold_start)
    more, _ = cold_start_duration(spec.model, spec.runtime, spec.cold_start, extra_download_bytes=300e6)
    assert more - base == pytest.approx(seconds, abs=0.01)


def test_image_pull_needs_an_rng():
    cold = ColdStartProfile(image_pull_probability=1.0, image_pull_time=10.0, container_image_bytes=2e9)
    _, without = cold_start_duration(MODEL, RUNTIME, cold)
    _, with_rng = cold_start_duration(MODEL, RUNTIME, cold, rng=np.random.default_rng(0))
    assert without["image_pull"] == 0.0
    assert with_rng["image_pull"] == pytest.approx(20.0)


def test_aws_tf_mobilenet_import_dominates():
    spec = scenario.preset("aws-tf-mobilenet-w120")
    total, stages = cold_start_duration(spec.model, spec.runtime, spec.cold_start)
    assert 4.0 <= stages["import"] <= 5.0
    assert stages["import"] == max(stages.values())
    assert total == pytest.approx(9.08, abs=0.5)


# predict component -------------------------------------------------------------


@pytest.mark.parametrize("system,expected", [("tf", 0.061), ("ort", 0.043)])
def test_gcp_mobilenet_predict(system, expected):
    spec = scenario.preset(f"gcp-{system}-mobilenet-w120")
    assert predict_component(spec.model, spec.runtime, spec.serverless) == pytest.approx(expected, abs=0.002)


@pytest.mark.parametrize("mem,expected", [(2.0, 0.012), (4.0, 0.009)])
def test_aws_ort_mobilenet_predict_vs_memory(mem, expected):
    spec = scenario.preset("aws-ort-mobilenet-w120", platform={"serverless": {"memory_gb": mem}})
    assert predict_component(spec.model, spec.runtime, spec.serverless) == pytest.approx(expected, abs=0.0007)


def test_predict_linear_in_inferences():
    cfg = ServerlessConfig()
    one = predict_component(MODEL, RUNTIME, cfg, 1)
    assert predict_component(MODEL, RUNTIME, cfg, 2) == 2 * one
    with pytest.raises(ValueError, match="n_inferences"):
        predict_component(MODEL, RUNTIME, cfg, 0)
    with pytest.raises(ValueError, match="n_inferences"):
        ServerlessConfig(n_inferences=0)


def test_warm_service_adds_network():
    cfg = ServerlessConfig(network_overhead=0.03)
    assert warm_service_time(MODEL, RUNTIME, cfg) == pytest.approx(0.08)


@given(
    st.floats(0.125, 16),
    st.floats(0.125, 16),
    st.one_of(st.none(), st.floats(0.5, 16)),
    st.floats(0.5, 4),
)
def test_memory_factor_monotone(m1, m2, sat, ref):
    lo, hi = sorted((m1, m2))
    a = memory_factor(ServerlessConfig(memory_gb=lo, memory_reference_gb=ref, memory_saturation_gb=sat), MODEL)
    b = memory_factor(ServerlessConfig(memory_gb=hi, memory_reference_gb=ref, memory_saturation_gb=sat), MODEL)
    assert b <= a
    assert a > 0 and b > 0


def test_memory_factor_saturates():
    cfg = lambda m: ServerlessConfig(memory_gb=m, memory_saturation_gb=3.0)  # noqa: E731
    assert memory_factor(cfg(6.0)) == memory_factor(cfg(3.0)) == pytest.approx(2 / 3)
    assert memory_factor(ServerlessConfig()) == 1.0


# dispatch, fleet accounting, reaping -----------------------------------------


def test_sequential_requests_reuse_one_instance():
    plat = serverless([inv(i, 100.0 * i) for i in range(6)])
    assert len(plat.instances) == 1
    assert plat.cold_starts == 1
    assert [r.cold for r in plat.records] == [True] + [False] * 5


def test_simultaneous_arrivals_each_cold():
    plat = serverless([inv(i, 5.0) for i in range(7)])
    assert plat.cold_starts == 7
    assert all(r.cold for r in plat.records)
    assert all(r.latency == pytest.approx(COLD_TOTAL) for r in plat.records)


def test_warm_latency_is_network_plus_predict():
    plat = serverless([inv(0, 0.0), inv(1, 50.0)])
    warm = plat.records[1]
    assert warm.latency == pytest.approx(0.01 + 0.05)
    assert warm.billed_duration == pytest.approx(0.05)


def test_lifo_reuse_picks_most_recent():
    fleet = Fleet()
    a, b = fleet.spawn(0.0), fleet.spawn(0.0)
    fleet.make_idle(a, 1.0)
    fleet.make_idle(b, 2.0)
    assert fleet.take() == b


def test_infinite_timeout_never_retires():
    fleet = Fleet()
    fleet.make_idle(fleet.spawn(0.0), 0.0)
    assert serverless_reap_idle(fleet, 1e9, math.inf) == []
    assert fleet.live == 1


def test_idle_601_seconds_is_retired():
    fleet = Fleet()
    fleet.make_idle(fleet.spawn(0.0), 0.0)
    assert serverless_reap_idle(fleet, 599.0, 600.0) == []
    [gone] = serverless_reap_idle(fleet, 601.0, 600.0)
    assert gone.retired_at == 601.0 and fleet.live == 0


def test_request_after_retirement_is_cold():
    cfg = ServerlessConfig(idle_timeout=600.0)
    plat = serverless([inv(0, 0.0), inv(1, 10.0), inv(2, 2000.0)], cfg)
    assert [r.cold for r in plat.records] == [True, False, True]
    assert plat.instances[0].retired_at is not None
    assert plat.records[2].instance_id == 1
    assert plat.records[2].stage_breakdown is not None


def test_zero_pool_matches_plain_serverless():
    arrivals = [inv(i, 0.3 * i) for i in range(40)]
    plain = serverless(arrivals, ServerlessConfig())
    pooled = serverless(arrivals, ServerlessConfig(provisioned_concurrency=0))
    assert plain.records == pooled.records


def test_big_enough_pool_means_no_cold_starts():
    arrivals = [inv(i, 0.01 * i) for i in range(30)]
    plat = serverless(arrivals, ServerlessConfig(provisioned_concurrency=30))
    assert plat.cold_starts == 0
    assert not any(r.cold for r in plat.records)


def test_pool_overflow_spawns_ceil_factor():
    fleet = provisioned_pool_init(ServerlessConfig(provisioned_concurrency=1))
    cfg = ServerlessConfig(provisioned_concurrency=1)
    assert serverless_dispatch(0.0, fleet, cfg).cold is False
    route = serverless_dispatch(0.0, fleet, cfg)
    assert route.cold and len(route.spawned) == 1
    assert fleet.created_on_demand == 2


def test_per_instance_concurrency_shares_instances():
    cfg = ServerlessConfig(per_instance_concurrency=3)
    fleet = Fleet(concurrency=3)
    first = serverless_dispatch(0.0, fleet, cfg)
    assert first.cold
    assert [serverless_dispatch(0.0, fleet, cfg).instance_id for _ in range(2)] == [0, 0]
    assert serverless_dispatch(0.0, fleet, cfg).cold


@given(st.lists(st.tuples(st.sampled_from(["arrive", "finish", "reap"]), st.floats(0, 50)), max_size=80),
       st.integers(1, 3), st.integers(0, 3))
def test_fleet_accounting(ops, conc, pool):
    cfg = ServerlessConfig(per_instance_concurrency=conc, provisioned_concurrency=pool, idle_timeout=30.0)
    fleet = provisioned_pool_init(cfg)
    running: list[int] = []
    now = 0.0
    for op, dt in ops:
        now += dt
        if op == "arrive":
            route = serverless_dispatch(now, fleet, cfg)
            running.append(route.instance_id)
            for extra in route.spawned:
                fleet.make_idle(extra, now)
        elif op == "finish" and running:
            fleet.release(running.pop(0), now)
        elif op == "reap":
            serverless_reap_idle(fleet, now, cfg.idle_timeout)
        busy = sum(1 for a in fleet.active if a > 0)
        idle = len(fleet.idle) + len(fleet.provisioned_idle)
        assert fleet.live == busy + idle
        assert fleet.created == fleet.live + fleet.retired
        assert sum(fleet.active) == len(running)
        assert all(0 <= a <= conc for a in fleet.active)
        assert not any(fleet.instances[i].provisioned for i in fleet.idle)
        assert all(fleet.instances[i].retired_at is None for i in list(fleet.idle) + fleet.provisioned_idle)


# dedicated server ----------------------------------------------------------------


def test_single_request_latency_is_service_time():
    plat, _ = drive(DedicatedPlatform, [inv(0, 3.0)], DedicatedServerConfig(service_time=0.25), 0)
    [r] = plat.records
    assert r.latency == 0.25 and r.status is Status.SUCCESS


def test_fcfs_queueing_and_timeout():
    cfg = DedicatedServerConfig(service_time=10.0, request_timeout=15.0)
    plat, _ = drive(DedicatedPlatform, [inv(i, 0.0) for i in range(3)], cfg, 0)
    by_id = {r.request_id: r for r in plat.records}
    assert by_id[0].latency == 10.0
    assert by_id[1].latency == 20.0  # waited 10 s, within the timeout
    assert by_id[2].status is Status.TIMEOUT


def test_queue_overflow():
    cfg = DedicatedServerConfig(service_time=1.0, queue_capacity=1)
    plat, _ = drive(DedicatedPlatform, [inv(i, 0.0) for i in range(4)], cfg, 0)
    statuses = sorted(str(r.status) for r in plat.records)
    assert statuses == ["QueueOverflow", "QueueOverflow", "Success", "Success"]


def test_mm1_closed_form():
    assert mm1_mean_sojourn(8, 10) == pytest.approx(0.5)
    assert mm1_mean_sojourn(10, 10) == math.inf


def test_exponential_service_mean():
    sim = Simulation()
    plat = DedicatedPlatform(sim, DedicatedServerConfig(service_time=0.1, service_distribution="exponential"), 3)
    draws = [plat.service_time(1) for _ in range(20_000)]
    assert np.mean(draws) == pytest.approx(0.1, rel=0.03)


# managed endpoint ------------------------------------------------------------------


def test_autoscale_idle_backlog_keeps_minimum():
    act = managed_autoscale_step(60.0, 0, 1, ManagedConfig())
    assert act.desired == 1 and act.added == 0


def test_autoscale_target_tracking():
    cfg = ManagedConfig(target_backlog_per_instance=60, scale_up_delay=240)
    act = managed_autoscale_step(420.0, 300, 1, cfg)
    assert act.desired == 5 and act.added == 4 and act.ready_at == 660.0
    # capacity already on its way is not ordered twice
    assert managed_autoscale_step(480.0, 300, 1, cfg, pending=4).added == 0


def test_autoscale_respects_maximum():
    cfg = ManagedConfig(target_backlog_per_instance=1, max_instances=3)
    assert managed_autoscale_step(0.0, 100, 1, cfg).desired == 3


def test_managed_scale_out_lags():
    base = DedicatedServerConfig(service_time=1.0, workers=1, request_timeout=math.inf)
    cfg = ManagedConfig(base=base, target_backlog_per_instance=10, scale_up_delay=240)
    arrivals = [inv(i, 0.1 * i) for i in range(3000)]  # 10/s against 1/s capacity
    plat, _ = drive(ManagedPlatform, arrivals, cfg, 0)
    added = [i for i in plat.instances if i.instance_id > 0]
    assert added
    first = min(added, key=lambda i: i.created_at)
    assert first.created_at == 60.0
    assert first.warm_at == 300.0
    assert len(plat.records) == 3000


def test_backlog_threshold_rejects():
    base = DedicatedServerConfig(service_time=5.0, request_timeout=math.inf)
    cfg = ManagedConfig(base=base, error_backlog_threshold=2)
    plat, _ = drive(ManagedPlatform, [inv(i, 0.0) for i in range(6)], cfg, 0)
    counts = {s: sum(1 for r in plat.records if r.status is s) for s in Status}
    assert counts[Status.BACKLOG_REJECTED] == 2
    assert counts[Status.SUCCESS] == 4


@pytest.mark.parametrize(
    "factory,field",
    [
        (lambda: ServerlessConfig(memory_gb=-1), "memory_gb"),
        (lambda: ServerlessConfig(overflow_spawn_factor=0.5), "overflow_spawn_factor"),
        (lambda: DedicatedServerConfig(service_distribution="gamma"), "service_distribution"),
        (lambda: ManagedConfig(min_instances=0), "min_instances"),
        (lambda: ColdStartProfile(image_pull_probability=2), "image_pull_probability"),
        (lambda: ModelProfile("x", artifact_bytes=0), "artifact_bytes"),
    ],
)
def test_profile_validation_names_field(factory, field):
    with pytest.raises(ValueError, match=field):
        factory()
