"""Aggregate metrics, time series and cold-start breakdowns from run records."""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .platforms.coldstart import STAGES
from .records import RequestRecord, Status

LATENCY_BUCKET = 10.0
INSTANCE_BUCKET = 60.0
LATENCY_CSV_HEADER = ["bucket_start_s", "mean_latency_s", "success_ratio"]
INSTANCE_CSV_HEADER = ["bucket_start_s", "live_instances"]
INSTANCE_LOG_HEADER = ["instance_id", "created_at_s", "warm_at_s", "retired_at_s", "cold_starts_served"]
RECORD_HEADER = [
    "request_id", "client_id", "arrival_time_s", "response_time_s", "latency_s", "status", "cold",
    "invocation_id", "instance_id", "billed_duration_s", "predict_s",
] + [f"stage_{s}_s" for s in STAGES]


class NoDataError(ValueError):
    """Raised when a metric is undefined for the given records (e.g. no successes)."""


def average_latency(records: Sequence[RequestRecord]) -> float:
    lat = [r.response_time - r.arrival_time for r in records if r.status is Status.SUCCESS]
    if not lat:
        raise NoDataError("average latency is undefined without successful requests")
    return math.fsum(lat) / len(lat)


def success_ratio(records: Sequence[RequestRecord]) -> float:
    if not records:
        raise NoDataError("success ratio is undefined for an empty run")
    return sum(1 for r in records if r.status is Status.SUCCESS) / len(records)


def percentiles(records: Sequence[RequestRecord], qs=(50, 95, 99)) -> dict[str, float | None]:
    lat = np.array([r.response_time - r.arrival_time for r in records if r.status is Status.SUCCESS])
    if lat.size == 0:
        return {f"p{q}": None for q in qs}
    vals = np.percentile(lat, qs)
    return {f"p{q}": float(v) for q, v in zip(qs, vals)}


@dataclass(frozen=True)
class LatencyBucket:
    start: float
    mean_latency: float | None
    success_ratio: float | None
    requests: int
    successes: int


def _n_buckets(duration: float, bucket: float) -> int:
    return max(1, math.ceil(duration / bucket - 1e-9))


def latency_timeseries(records: Sequence[RequestRecord], bucket: float = LATENCY_BUCKET, duration: float | None = None) -> list[LatencyBucket]:
    """Bucket records by arrival time; buckets tile ``[0, duration)`` and empty ones carry ``None``."""
    if not bucket > 0:
        raise ValueError(f"bucket: must be > 0, got {bucket}")
    bucket = float(bucket)
    if duration is None:
        last = max((r.arrival_time for r in records), default=0.0)
        duration = (math.floor(last / bucket) + 1) * bucket
    n = _n_buckets(duration, bucket)
    lat_sum = [0.0] * n
    counts = [0] * n
    ok = [0] * n
    for r in records:
        i = min(int(r.arrival_time // bucket), n - 1)
        counts[i] += 1
        if r.status is Status.SUCCESS:
            ok[i] += 1
            lat_sum[i] += r.response_time - r.arrival_time
    return [
        LatencyBucket(
            i * bucket,
            lat_sum[i] / ok[i] if ok[i] else None,
            ok[i] / counts[i] if counts[i] else None,
            counts[i],
            ok[i],
        )
        for i in range(n)
    ]


def instance_timeseries(instances, bucket: float = INSTANCE_BUCKET, duration: float = 0.0) -> list[tuple[float, int]]:
    """Live-instance count sampled at each bucket boundary (created <= t < retired)."""
    if not bucket > 0:
        raise ValueError(f"bucket: must be > 0, got {bucket}")
    bucket = float(bucket)
    n = _n_buckets(duration, bucket)
    created = np.sort(np.array([i.created_at for i in instances], dtype=float))
    retired = np.sort(np.array([i.retired_at for i in instances if i.retired_at is not None], dtype=float))
    out = []
    for k in range(n):
        t = k * bucket
        live = int(np.searchsorted(created, t, side="right") - np.searchsorted(retired, t, side="right"))
        out.append((t, live))
    return out


def peak_live(instances, start: float = 0.0, end: float = math.inf) -> int:
    """Maximum number of simultaneously live instances within ``[start, end)``."""
    events = []
    for inst in instances:
        lo = inst.created_at
        hi = math.inf if inst.retired_at is None else inst.retired_at
        if hi <= start or lo >= end:
            continue
        events.append((max(lo, start), 1))
        events.append((hi, -1))
    # Retirements sort before creations at the same instant (half-open intervals).
    events.sort(key=lambda e: (e[0], e[1]))
    live = peak = 0
    for _, d in events:
        live += d
        peak = max(peak, live)
    return peak


def peak_concurrency(records: Sequence[RequestRecord], start: float = 0.0, end: float = math.inf) -> int:
    """Peak number of invocations in flight (dispatch to response) within ``[start, end)``."""
    spans = {}
    for r in records:
        if r.status is not Status.SUCCESS:
            continue
        key = r.invocation_id if r.invocation_id is not None else ("r", r.request_id)
        t0 = r.dispatch_time if r.dispatch_time is not None else r.arrival_time
        spans[key] = (t0, r.response_time)
    events = []
    for t0, t1 in spans.values():
        if t1 <= start or t0 >= end:
            continue
        events.append((max(t0, start), 1))
        events.append((t1, -1))
    events.sort(key=lambda e: (e[0], e[1]))
    live = peak = 0
    for _, d in events:
        live += d
        peak = max(peak, live)
    return peak


def coldstart_breakdown(records: Sequence[RequestRecord]) -> dict:
    """Per-stage means for cold invocations; E2E and predict means for warm ones."""
    cold: dict[str, list[float]] = {s: [] for s in STAGES}
    cold_e2e, warm_e2e, warm_pred = [], [], []
    seen = set()
    for r in records:
        if r.status is not Status.SUCCESS:
            continue
        key = r.invocation_id if r.invocation_id is not None else ("r", r.request_id)
        if key in seen:
            continue
        seen.add(key)
        if r.cold and r.stage_breakdown is not None:
            for s in STAGES:
                cold[s].append(r.stage_breakdown.get(s, 0.0))
            cold_e2e.append(r.e2e)
        elif not r.cold:
            warm_e2e.append(r.e2e)
            if r.predict_time is not None:
                warm_pred.append(r.predict_time)

    def mean(xs):
        return math.fsum(xs) / len(xs) if xs else None

    out = {"cold": {}, "warm": {}}
    if cold_e2e:
        out["cold"] = {s: mean(v) for s, v in cold.items()}
        out["cold"]["e2e"] = mean(cold_e2e)
        out["cold"]["count"] = len(cold_e2e)
    if warm_e2e:
        out["warm"] = {"e2e": mean(warm_e2e), "predict": mean(warm_pred), "count": len(warm_e2e)}
    return out


@dataclass
class MetricsReport:
    avg_latency_success: float | None
    success_ratio: float | None
    total_cost: float
    latency_series: list = field(default_factory=list)
    instance_series: list = field(default_factory=list)
    cold_start_stats: dict = field(default_factory=dict)
    requests: int = 0
    successes: int = 0
    invocations: int = 0
    cold_starts: int = 0
    peak_live_instances: int = 0
    duration: float = 0.0
    status_counts: dict = field(default_factory=dict)
    percentiles: dict = field(default_factory=dict)
    label: str = ""
    workload: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["latency_series"] = [asdict(b) for b in self.latency_series]
        d["instance_series"] = [list(x) for x in self.instance_series]
        return _finite(d)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        d = dict(d)
        d["latency_series"] = [LatencyBucket(**b) for b in d.get("latency_series", [])]
        d["instance_series"] = [tuple(x) for x in d.get("instance_series", [])]
        known = set(cls.__dataclass_fields__)
        return cls(**{k: v for k, v in d.items() if k in known})


def build_report(
    records: Sequence[RequestRecord],
    instances,
    cost: float,
    duration: float,
    cold_starts: int = 0,
    latency_bucket: float = LATENCY_BUCKET,
    instance_bucket: float = INSTANCE_BUCKET,
    label: str = "",
    workload: str = "",
) -> MetricsReport:
    n_ok = sum(1 for r in records if r.status is Status.SUCCESS)
    inv_ids = {r.invocation_id if r.invocation_id is not None else ("r", r.request_id) for r in records}
    counts = Counter(str(r.status) for r in records)
    return MetricsReport(
        avg_latency_success=average_latency(records) if n_ok else None,
        success_ratio=success_ratio(records) if records else None,
        total_cost=cost,
        latency_series=latency_timeseries(records, latency_bucket, duration),
        instance_series=instance_timeseries(instances, instance_bucket, duration),
        cold_start_stats=coldstart_breakdown(records),
        requests=len(records),
        successes=n_ok,
        invocations=len(inv_ids),
        cold_starts=cold_starts,
        peak_live_instances=peak_live(instances),
        duration=duration,
        status_counts={s.value: counts.get(s.value, 0) for s in Status},
        percentiles=percentiles(records),
        label=label,
        workload=workload,
    )


# comparison ------------------------------------------------------------------

COMPARE_COLUMNS = [
    "system", "avg_latency_s", "success_ratio", "cost", "latency_ratio", "success_ratio_ratio", "cost_ratio", "warning",
]


def _ratio(a, b):
    if a is None or b is None:
        return None
    if b == 0:
        return None if a == 0 else math.inf
    return a / b


def compare_report(reports: Sequence[tuple[str, MetricsReport]], baseline: int | str = 0) -> list[dict]:
    """Side-by-side table; ratio columns are ``system / baseline`` quotients."""
    if len(reports) < 2:
        raise ValueError("compare_report needs at least two reports")
    names = [n for n, _ in reports]
    if isinstance(baseline, str):
        if baseline not in names:
            raise ValueError(f"baseline {baseline!r} not among {names}")
        baseline = names.index(baseline)
    base = reports[baseline][1]
    rows = []
    for name, rep in reports:
        warn = ""
        if rep.workload != base.workload or rep.requests != base.requests:
            warn = f"workload mismatch ({rep.workload or '?'}:{rep.requests} vs {base.workload or '?'}:{base.requests})"
        rows.append(
            {
                "system": name,
                "avg_latency_s": rep.avg_latency_success,
                "success_ratio": rep.success_ratio,
                "cost": rep.total_cost,
                "latency_ratio": _ratio(rep.avg_latency_success, base.avg_latency_success),
                "success_ratio_ratio": _ratio(rep.success_ratio, base.success_ratio),
                "cost_ratio": _ratio(rep.total_cost, base.total_cost),
                "warning": warn,
            }
        )
    return rows


def format_compare(rows: list[dict]) -> str:
    def cell(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.4g}"
        return str(v)

    table = [COMPARE_COLUMNS] + [[cell(r[c]) for c in COMPARE_COLUMNS] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(COMPARE_COLUMNS))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table)


# serialisation -----------------------------------------------------------------

def _finite(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_finite(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_metrics_json(report: MetricsReport, path) -> None:
    Path(path).write_text(dumps(report.to_dict()), encoding="utf-8")


def read_metrics_json(path) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_latency_csv(series: Sequence[LatencyBucket], path) -> None:
    _write_rows(path, LATENCY_CSV_HEADER, ((b.start, b.mean_latency, b.success_ratio) for b in series))


def write_instance_csv(series, path) -> None:
    _write_rows(path, INSTANCE_CSV_HEADER, series)


def write_instance_log(instances, path) -> None:
    _write_rows(
        path,
        INSTANCE_LOG_HEADER,
        ((i.instance_id, i.created_at, i.warm_at, i.retired_at, i.cold_starts_served) for i in instances),
    )


def write_records_csv(records: Sequence[RequestRecord], path) -> None:
    def row(r: RequestRecord):
        stages = r.stage_breakdown or {}
        return [
            r.request_id, r.client_id, r.arrival_time, r.response_time, r.latency, r.status.value, int(r.cold),
            r.invocation_id, r.instance_id, r.billed_duration, r.predict_time,
        ] + [stages.get(s) for s in STAGES]

    _write_rows(path, RECORD_HEADER, (row(r) for r in records))
