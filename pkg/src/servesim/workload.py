"""MMPP request streams: generation, client splitting, payload draw, batching.

The arrival process is a two-state Markov-modulated Poisson process. The
modulating chain alternates between a low-rate and a high-rate state with
exponentially distributed dwell times; within a state, arrivals are Poisson
at that state's rate.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import rng as rngmod

LOW, HIGH = 0, 1
INITIAL_STATES = ("low", "high", "stationary")

CSV_HEADER = ["request_id", "client_id", "arrival_time_s", "payload_id", "payload_bytes", "batch_count"]


@dataclass(frozen=True)
class MmppParams:
    lambda_low: float
    lambda_high: float
    mean_dwell_low: float
    mean_dwell_high: float

    def __post_init__(self):
        if not self.lambda_low > 0:
            raise ValueError(f"lambda_low: must be > 0, got {self.lambda_low}")
        if not self.lambda_high >= self.lambda_low:
            raise ValueError(
                f"lambda_high: must be >= lambda_low ({self.lambda_low}), got {self.lambda_high}"
            )
        if not self.mean_dwell_low > 0:
            raise ValueError(f"mean_dwell_low: must be > 0, got {self.mean_dwell_low}")
        if not self.mean_dwell_high > 0:
            raise ValueError(f"mean_dwell_high: must be > 0, got {self.mean_dwell_high}")

    @property
    def high_fraction(self) -> float:
        """Stationary probability of the high-rate state."""
        return self.mean_dwell_high / (self.mean_dwell_low + self.mean_dwell_high)

    @property
    def switch_rate(self) -> float:
        return 1.0 / self.mean_dwell_low + 1.0 / self.mean_dwell_high


@dataclass(frozen=True)
class WorkloadSpec:
    mmpp: MmppParams
    duration: float = 900.0
    num_clients: int = 8
    pool_size: int = 200
    seed: int = 0
    batch_size: int = 1
    payload_bytes: int = 0
    initial_state: str = "low"

    def __post_init__(self):
        if not self.duration >= 0 or math.isinf(self.duration):
            raise ValueError(f"duration: must be finite and >= 0, got {self.duration}")
        if self.num_clients < 1:
            raise ValueError(f"num_clients: must be >= 1, got {self.num_clients}")
        if self.pool_size < 1:
            raise ValueError(f"pool_size: must be >= 1, got {self.pool_size}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size: must be >= 1, got {self.batch_size}")
        if self.seed < 0:
            raise ValueError(f"seed: must be a non-negative integer, got {self.seed}")
        if self.payload_bytes < 0:
            raise ValueError(f"payload_bytes: must be >= 0, got {self.payload_bytes}")
        if self.initial_state not in INITIAL_STATES:
            raise ValueError(f"initial_state: must be one of {INITIAL_STATES}, got {self.initial_state!r}")


@dataclass(frozen=True, slots=True)
class RequestEvent:
    request_id: int
    client_id: int
    arrival_time: float
    payload_id: int = 0
    payload_bytes: int = 0
    batch_count: int = 1


@dataclass(frozen=True, slots=True)
class Invocation:
    """One call to the serving system, carrying one or more client samples."""

    invocation_id: int
    client_id: int
    arrival_time: float
    request_ids: tuple
    sample_arrivals: tuple
    payload_bytes: int = 0

    @property
    def batch_count(self) -> int:
        return len(self.request_ids)


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    state: int

    @property
    def high(self) -> bool:
        return self.state == HIGH


def mean_rate(params: MmppParams) -> float:
    if not isinstance(params, MmppParams):
        raise TypeError("mean_rate expects MmppParams")
    p_high = params.high_fraction
    return (1.0 - p_high) * params.lambda_low + p_high * params.lambda_high


def expected_count(params: MmppParams, duration: float, initial_state: str = "stationary") -> float:
    """Expected number of arrivals in ``[0, duration]`` for a given starting state.

    For a chain started out of equilibrium the high-state probability relaxes
    as ``pi_H + (p0 - pi_H) * exp(-q t)`` with ``q`` the total switching rate.
    """
    base = mean_rate(params) * duration
    if initial_state == "stationary" or duration == 0:
        return base
    p_high = params.high_fraction
    q = params.switch_rate
    p0 = 1.0 if initial_state == "high" else 0.0
    transient = (p0 - p_high) * (1.0 - math.exp(-q * duration)) / q
    return base + (params.lambda_high - params.lambda_low) * transient


def solve_dwell_low(
    lambda_low: float,
    lambda_high: float,
    dwell_high: float,
    target_count: float,
    duration: float,
    initial_state: str = "low",
) -> float:
    """Mean low-state dwell giving ``target_count`` expected arrivals."""

    def gap(dwell_low):
        return expected_count(MmppParams(lambda_low, lambda_high, dwell_low, dwell_high), duration, initial_state) - target_count

    lo, hi = 1e-6, 1e7
    if gap(lo) * gap(hi) > 0:
        raise ValueError(
            f"target_count {target_count} unreachable with rates ({lambda_low}, {lambda_high}) over {duration} s"
        )
    return brentq(gap, lo, hi, xtol=1e-10)


def _state_path(params: MmppParams, duration: float, initial_state: str, gen: np.random.Generator) -> list[Segment]:
    if initial_state == "stationary":
        state = HIGH if gen.random() < params.high_fraction else LOW
    else:
        state = HIGH if initial_state == "high" else LOW
    segments = []
    t = 0.0
    while t < duration:
        dwell = gen.exponential(params.mean_dwell_high if state == HIGH else params.mean_dwell_low)
        end = min(t + dwell, duration)
        if end > t:
            segments.append(Segment(t, end, state))
        t = end
        state = 1 - state
    return segments


def _draw(spec: WorkloadSpec) -> tuple[list[Segment], np.ndarray]:
    gen = rngmod.stream(spec.seed, rngmod.ARRIVALS)
    segments = _state_path(spec.mmpp, spec.duration, spec.initial_state, gen)
    if not segments:
        return segments, np.empty(0)
    starts = np.array([s.start for s in segments])
    lengths = np.array([s.end - s.start for s in segments])
    rates = np.where([s.high for s in segments], spec.mmpp.lambda_high, spec.mmpp.lambda_low)
    counts = gen.poisson(rates * lengths)
    # Given the count, Poisson arrival times in a segment are iid uniform.
    u = gen.random(int(counts.sum()))
    times = np.repeat(starts, counts) + np.repeat(lengths, counts) * u
    return segments, np.sort(times)


def state_path(spec: WorkloadSpec) -> list[Segment]:
    """The modulating chain's realisation for ``spec`` (same draw as the arrivals)."""
    return _draw(spec)[0]


def generate_arrivals(spec: WorkloadSpec) -> list[RequestEvent]:
    _, times = _draw(spec)
    n = len(times)
    payload_ids = rngmod.stream(spec.seed, rngmod.PAYLOADS).integers(0, spec.pool_size, size=n)
    k = spec.num_clients
    pb = spec.payload_bytes
    return [
        RequestEvent(i, i % k, t, p, pb, 1)
        for i, (t, p) in enumerate(zip(times.tolist(), payload_ids.tolist()))
    ]


def split_clients(events: Sequence[RequestEvent], num_clients: int) -> list[list[RequestEvent]]:
    """Round-robin by arrival order, so each client carries 1/num_clients of the rate."""
    if num_clients < 1:
        raise ValueError(f"num_clients: must be >= 1, got {num_clients}")
    streams: list[list[RequestEvent]] = [[] for _ in range(num_clients)]
    for i, ev in enumerate(events):
        c = i % num_clients
        streams[c].append(ev if ev.client_id == c else replace(ev, client_id=c))
    return streams


def merge_streams(streams: Iterable[Sequence[RequestEvent]]) -> list[RequestEvent]:
    merged = [ev for s in streams for ev in s]
    merged.sort(key=lambda ev: (ev.arrival_time, ev.request_id))
    return merged


def assign_payloads(events: Sequence[RequestEvent], pool_size: int, seed: int) -> list[RequestEvent]:
    if pool_size < 1:
        raise ValueError(f"pool_size: must be >= 1, got {pool_size}")
    ids = rngmod.stream(seed, rngmod.PAYLOADS).integers(0, pool_size, size=len(events)).tolist()
    return [replace(ev, payload_id=p) for ev, p in zip(events, ids)]


def batch_requests(client_stream: Sequence[RequestEvent], batch_size: int, first_id: int = 0) -> list[Invocation]:
    """Group consecutive requests of one client; a short final group is flushed at the end."""
    if batch_size < 1:
        raise ValueError(f"batch_size: must be >= 1, got {batch_size}")
    out = []
    for j in range(0, len(client_stream), batch_size):
        group = client_stream[j:j + batch_size]
        out.append(
            Invocation(
                invocation_id=first_id + len(out),
                client_id=group[0].client_id,
                arrival_time=group[-1].arrival_time,
                request_ids=tuple(ev.request_id for ev in group),
                sample_arrivals=tuple(ev.arrival_time for ev in group),
                payload_bytes=sum(ev.payload_bytes for ev in group),
            )
        )
    return out


def build_invocations(spec: WorkloadSpec, events: Sequence[RequestEvent] | None = None) -> list[Invocation]:
    """Full client pipeline: split, batch per client, merge back into arrival order."""
    if events is None:
        events = generate_arrivals(spec)
    if spec.batch_size == 1:
        return [
            Invocation(ev.request_id, ev.client_id, ev.arrival_time, (ev.request_id,), (ev.arrival_time,), ev.payload_bytes)
            for ev in events
        ]
    invs = [inv for s in split_clients(events, spec.num_clients) for inv in batch_requests(s, spec.batch_size)]
    invs.sort(key=lambda inv: (inv.arrival_time, inv.request_ids[-1]))
    return [replace(inv, invocation_id=i) for i, inv in enumerate(invs)]


def write_csv(events: Iterable[RequestEvent], dest) -> None:
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for ev in events:
            w.writerow([ev.request_id, ev.client_id, f"{ev.arrival_time:.6f}", ev.payload_id, ev.payload_bytes, ev.batch_count])
    finally:
        if own:
            fh.close()


def read_csv(src) -> list[RequestEvent]:
    own = isinstance(src, (str, Path))
    fh = open(src, newline="", encoding="utf-8") if own else src
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected workload header {header!r}")
        return [
            RequestEvent(int(r[0]), int(r[1]), float(r[2]), int(r[3]), int(r[4]), int(r[5]))
            for r in reader
            if r
        ]
    finally:
        if own:
            fh.close()


def to_csv_string(events: Iterable[RequestEvent]) -> str:
    buf = io.StringIO()
    write_csv(events, buf)
    return buf.getvalue()
