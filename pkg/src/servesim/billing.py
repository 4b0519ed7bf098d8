"""Cost models: per-invocation serverless billing and hourly instance billing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

# Absorbs float noise such as 0.3/0.1 = 2.9999999999999996 without
# moving any real boundary (durations are far coarser than 1e-9 units).
_ROUND_EPS = 1e-9


@dataclass(frozen=True)
class ServerlessPricing:
    per_million_requests: float = 0.20
    per_gb_second: float = 1.66667e-5
    billing_granularity: float = 0.001
    free_tier: bool = False  # accepted for completeness, never applied

    def __post_init__(self):
        if self.per_million_requests < 0:
            raise ValueError(f"per_million_requests: must be >= 0, got {self.per_million_requests}")
        if self.per_gb_second < 0:
            raise ValueError(f"per_gb_second: must be >= 0, got {self.per_gb_second}")
        if not self.billing_granularity > 0:
            raise ValueError(f"billing_granularity: must be > 0, got {self.billing_granularity}")


@dataclass(frozen=True)
class HourlyPricing:
    per_hour: float

    def __post_init__(self):
        if self.per_hour < 0:
            raise ValueError(f"per_hour: must be >= 0, got {self.per_hour}")


def billed_units(duration: float, granularity: float) -> int:
    if duration < 0:
        raise ValueError(f"billed duration must be >= 0, got {duration}")
    return max(0, math.ceil(duration / granularity - _ROUND_EPS))


def invocation_durations(records) -> list[float]:
    """Billed duration per invocation, counting batched samples once."""
    seen = {}
    for r in records:
        key = r.invocation_id if r.invocation_id is not None else ("r", r.request_id)
        if key not in seen:
            seen[key] = r.billed_duration
    return list(seen.values())


def serverless_cost_from_durations(durations: Iterable[float], memory_gb: float, pricing: ServerlessPricing) -> float:
    g = pricing.billing_granularity
    units = 0
    n = 0
    for d in durations:
        units += billed_units(d, g)
        n += 1
    return n * pricing.per_million_requests / 1e6 + units * g * memory_gb * pricing.per_gb_second


def serverless_cost(records, memory_gb: float, pricing: ServerlessPricing) -> float:
    """Request fee plus GB-seconds, each invocation's duration rounded up to the granularity.

    Records without a successful execution carry ``billed_duration == 0`` but
    are still counted as invocations.
    """
    return serverless_cost_from_durations(invocation_durations(records), memory_gb, pricing)


def dedicated_server_cost(duration: float, pricing: HourlyPricing) -> float:
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    return duration / 3600.0 * pricing.per_hour


def managed_service_cost(instances, pricing: HourlyPricing, run_end: float) -> float:
    """Hourly price times the summed lifetime of every instance (provisioning start to retirement or run end)."""
    total = 0.0
    for inst in instances:
        end = run_end if inst.retired_at is None else min(inst.retired_at, run_end)
        total += max(0.0, end - inst.created_at)
    return total / 3600.0 * pricing.per_hour
