"""Per-request outcome records shared by the platform models and the analyzer."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Status(str, enum.Enum):
    SUCCESS = "Success"
    TIMEOUT = "Timeout"
    QUEUE_OVERFLOW = "QueueOverflow"
    BACKLOG_REJECTED = "BacklogRejected"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class RequestRecord:
    request_id: int
    client_id: int
    arrival_time: float
    response_time: float | None
    status: Status
    cold: bool = False
    stage_breakdown: dict | None = None
    predict_time: float | None = None
    billed_duration: float = 0.0
    instance_id: int | None = None
    invocation_id: int | None = None
    dispatch_time: float | None = None

    def __post_init__(self):
        if self.status is Status.SUCCESS:
            if self.response_time is None or self.response_time < self.arrival_time:
                raise ValueError(
                    f"request {self.request_id}: successful record needs response_time >= arrival_time"
                )

    @property
    def ok(self) -> bool:
        return self.status is Status.SUCCESS

    @property
    def latency(self) -> float | None:
        if self.response_time is None:
            return None
        return self.response_time - self.arrival_time

    @property
    def e2e(self) -> float | None:
        """Latency from when the invocation was sent (differs from ``latency`` only under batching)."""
        if self.response_time is None:
            return None
        start = self.arrival_time if self.dispatch_time is None else self.dispatch_time
        return self.response_time - start


def sample_records(inv, response_time, status, **kw) -> list[RequestRecord]:
    """One record per sample carried by invocation ``inv``."""
    return [
        RequestRecord(
            request_id=rid,
            client_id=inv.client_id,
            arrival_time=arr,
            response_time=response_time,
            status=status,
            invocation_id=inv.invocation_id,
            dispatch_time=inv.arrival_time,
            **kw,
        )
        for rid, arr in zip(inv.request_ids, inv.sample_arrivals)
    ]
