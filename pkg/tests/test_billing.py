import pytest
from hypothesis import given
from hypothesis import strategies as st

from servesim.billing import (
    HourlyPricing,
    ServerlessPricing,
    billed_units,
    dedicated_server_cost,
    managed_service_cost,
    serverless_cost,
    serverless_cost_from_durations,
)
from servesim.platforms import InstanceState
from servesim.records import RequestRecord, Status

P = 1.66667e-5
F = 0.20


def test_no_invocations_cost_nothing():
    assert serverless_cost_from_durations([], 2.0, ServerlessPricing()) == 0.0
    assert serverless_cost([], 2.0, ServerlessPricing()) == 0.0


def test_single_invocation():
    pricing = ServerlessPricing(per_million_requests=F, per_gb_second=P, billing_granularity=0.001)
    assert serverless_cost_from_durations([1.0], 2.0, pricing) == 2 * P + F / 1e6


def test_rounding_oracle_is_bit_exact():
    pricing = ServerlessPricing(per_million_requests=F, per_gb_second=P, billing_granularity=0.1)
    got = serverless_cost_from_durations([0.25] * 100, 2.0, pricing)
    assert got == 100 * 0.3 * 2 * P + 100 * F / 1e6


@pytest.mark.parametrize(
    "d,g,units",
    [(0.0, 0.1, 0), (0.1, 0.1, 1), (0.3, 0.1, 3), (0.30001, 0.1, 4), (0.0005, 0.001, 1), (1.0, 0.001, 1000)],
)
def test_billed_units(d, g, units):
    assert billed_units(d, g) == units


def test_negative_duration_rejected():
    with pytest.raises(ValueError):
        billed_units(-0.1, 0.1)


def test_batched_samples_billed_once():
    recs = [
        RequestRecord(i, 0, 0.0, 1.0, Status.SUCCESS, billed_duration=0.5, invocation_id=0)
        for i in range(4)
    ]
    pricing = ServerlessPricing(billing_granularity=0.1)
    assert serverless_cost(recs, 1.0, pricing) == serverless_cost_from_durations([0.5], 1.0, pricing)


@pytest.mark.parametrize("hours_rate,expected", [(0.37, 0.0925), (0.75, 0.1875)])
def test_hourly_server(hours_rate, expected):
    assert dedicated_server_cost(0.0, HourlyPricing(hours_rate)) == 0.0
    assert dedicated_server_cost(900.0, HourlyPricing(hours_rate)) == pytest.approx(expected)


def test_managed_single_instance_equals_dedicated():
    pricing = HourlyPricing(0.56)
    assert managed_service_cost([InstanceState(0, 0.0)], pricing, 900.0) == dedicated_server_cost(900.0, pricing)


def test_managed_hand_sum():
    pricing = HourlyPricing(0.56)
    insts = [InstanceState(0, 0.0), InstanceState(1, 420.0)]
    assert managed_service_cost(insts, pricing, 900.0) == pytest.approx((900 + 480) / 3600 * 0.56)


def test_pricing_validation():
    with pytest.raises(ValueError, match="billing_granularity"):
        ServerlessPricing(billing_granularity=0)
    with pytest.raises(ValueError, match="per_hour"):
        HourlyPricing(-1)


durations = st.lists(st.floats(0, 120, allow_nan=False), max_size=60)
granularity = st.sampled_from([0.001, 0.01, 0.1, 1.0])


@given(durations, st.floats(0, 120), granularity, st.floats(0.125, 10))
def test_adding_an_invocation_never_lowers_cost(ds, extra, g, mem):
    pricing = ServerlessPricing(billing_granularity=g)
    assert serverless_cost_from_durations(ds + [extra], mem, pricing) >= serverless_cost_from_durations(ds, mem, pricing)


@given(durations, st.floats(0, 10), granularity, st.floats(0.125, 10))
def test_longer_durations_never_cost_less(ds, delta, g, mem):
    pricing = ServerlessPricing(billing_granularity=g)
    longer = [d + delta for d in ds]
    assert serverless_cost_from_durations(longer, mem, pricing) >= serverless_cost_from_durations(ds, mem, pricing)


@given(durations, granularity, st.floats(0.125, 10), st.floats(0.125, 10))
def test_more_memory_never_costs_less(ds, g, m1, m2):
    pricing = ServerlessPricing(billing_granularity=g)
    lo, hi = sorted((m1, m2))
    assert serverless_cost_from_durations(ds, hi, pricing) >= serverless_cost_from_durations(ds, lo, pricing)


@given(st.floats(0, 1e5), st.floats(0, 1e5), st.floats(0, 5))
def test_hourly_cost_monotone_in_time(a, b, rate):
    lo, hi = sorted((a, b))
    assert dedicated_server_cost(hi, HourlyPricing(rate)) >= dedicated_server_cost(lo, HourlyPricing(rate))


@given(st.floats(0, 120), granularity)
def test_billed_time_covers_duration(d, g):
    units = billed_units(d, g)
    assert units * g >= d - 1e-9 * g
    assert (units - 1) * g < d or units == 0
