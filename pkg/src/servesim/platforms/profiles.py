"""Immutable profile and configuration values for the platform models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

GB = 1e9
MB = 1e6


def _check(cond: bool, name: str, msg: str, value) -> None:
    if not cond:
        raise ValueError(f"{name}: {msg}, got {value!r}")


@dataclass(frozen=True)
class ModelProfile:
    name: str
    artifact_bytes: float
    packed_in_image: bool = False
    predict_warm: float = 0.0
    predict_cold_extra: float = 0.0
    input_bytes: int = 0
    memory_saturation_gb: float = math.inf

    def __post_init__(self):
        _check(self.artifact_bytes > 0, "artifact_bytes", "must be > 0", self.artifact_bytes)
        _check(self.predict_warm >= 0, "predict_warm", "must be >= 0", self.predict_warm)
        _check(self.predict_cold_extra >= 0, "predict_cold_extra", "must be >= 0", self.predict_cold_extra)
        _check(self.input_bytes >= 0, "input_bytes", "must be >= 0", self.input_bytes)
        _check(self.memory_saturation_gb > 0, "memory_saturation_gb", "must be > 0", self.memory_saturation_gb)


@dataclass(frozen=True)
class RuntimeProfile:
    """Serving runtime. ``load_time`` is fixed; ``load_time_per_mb`` scales with the artifact."""

    name: str
    import_time: float = 0.0
    load_time: float = 0.0
    predict_scale: float = 1.0
    load_time_per_mb: float = 0.0

    def __post_init__(self):
        for f in ("import_time", "load_time", "predict_scale", "load_time_per_mb"):
            v = getattr(self, f)
            _check(v >= 0, f, "must be >= 0", v)

    def model_load_time(self, model: ModelProfile) -> float:
        return self.load_time + self.load_time_per_mb * model.artifact_bytes / MB


@dataclass(frozen=True)
class ColdStartProfile:
    container_overhead: float = 0.0
    download_bandwidth: float = 125e6
    image_pull_probability: float = 0.0
    image_pull_time: float = 0.0  # seconds per GB of image
    container_image_bytes: float = 0.0

    def __post_init__(self):
        _check(self.container_overhead >= 0, "container_overhead", "must be >= 0", self.container_overhead)
        _check(self.download_bandwidth > 0, "download_bandwidth", "must be > 0", self.download_bandwidth)
        _check(
            0.0 <= self.image_pull_probability <= 1.0,
            "image_pull_probability",
            "must be in [0, 1]",
            self.image_pull_probability,
        )
        _check(self.image_pull_time >= 0, "image_pull_time", "must be >= 0", self.image_pull_time)
        _check(self.container_image_bytes >= 0, "container_image_bytes", "must be >= 0", self.container_image_bytes)

    @property
    def image_pull_seconds(self) -> float:
        return self.image_pull_time * self.container_image_bytes / GB


@dataclass(frozen=True)
class ServerlessConfig:
    memory_gb: float = 2.0
    idle_timeout: float = 600.0
    provisioned_concurrency: int = 0
    per_instance_concurrency: int = 1
    memory_reference_gb: float = 2.0
    memory_saturation_gb: float | None = None  # None: take the model's value
    overflow_spawn_factor: float | None = None  # None: 1.0, or 1.5 with a provisioned pool
    network_overhead: float = 0.0
    n_inferences: int = 1
    extra_download_bytes: float = 0.0
    # Apply the memory factor to the CPU-bound cold stages (import, load,
    # first predict) as well. Has no effect at the reference memory size.
    scale_cold_with_memory: bool = True

    def __post_init__(self):
        _check(self.memory_gb > 0, "memory_gb", "must be > 0", self.memory_gb)
        _check(self.idle_timeout > 0, "idle_timeout", "must be > 0", self.idle_timeout)
        _check(self.provisioned_concurrency >= 0, "provisioned_concurrency", "must be >= 0", self.provisioned_concurrency)
        _check(self.per_instance_concurrency >= 1, "per_instance_concurrency", "must be >= 1", self.per_instance_concurrency)
        _check(self.memory_reference_gb > 0, "memory_reference_gb", "must be > 0", self.memory_reference_gb)
        if self.memory_saturation_gb is not None:
            _check(self.memory_saturation_gb > 0, "memory_saturation_gb", "must be > 0", self.memory_saturation_gb)
        if self.overflow_spawn_factor is not None:
            _check(self.overflow_spawn_factor >= 1, "overflow_spawn_factor", "must be >= 1", self.overflow_spawn_factor)
        _check(self.network_overhead >= 0, "network_overhead", "must be >= 0", self.network_overhead)
        _check(self.n_inferences >= 1, "n_inferences", "must be >= 1", self.n_inferences)
        _check(self.extra_download_bytes >= 0, "extra_download_bytes", "must be >= 0", self.extra_download_bytes)

    @property
    def spawn_factor(self) -> float:
        if self.overflow_spawn_factor is not None:
            return self.overflow_spawn_factor
        return 1.5 if self.provisioned_concurrency > 0 else 1.0


SERVICE_DISTRIBUTIONS = ("deterministic", "exponential")


@dataclass(frozen=True)
class DedicatedServerConfig:
    workers: int = 1
    service_time: float = 0.02
    queue_capacity: int | None = None  # None: unbounded
    request_timeout: float = 60.0
    service_distribution: str = "deterministic"
    network_overhead: float = 0.0

    def __post_init__(self):
        _check(self.workers >= 1, "workers", "must be >= 1", self.workers)
        _check(self.service_time > 0, "service_time", "must be > 0", self.service_time)
        if self.queue_capacity is not None:
            _check(self.queue_capacity >= 0, "queue_capacity", "must be >= 0", self.queue_capacity)
        _check(self.request_timeout > 0, "request_timeout", "must be > 0 (use inf to disable)", self.request_timeout)
        _check(
            self.service_distribution in SERVICE_DISTRIBUTIONS,
            "service_distribution",
            f"must be one of {SERVICE_DISTRIBUTIONS}",
            self.service_distribution,
        )
        _check(self.network_overhead >= 0, "network_overhead", "must be >= 0", self.network_overhead)


@dataclass(frozen=True)
class ManagedConfig:
    base: DedicatedServerConfig = field(default_factory=DedicatedServerConfig)
    min_instances: int = 1
    target_backlog_per_instance: float = 10.0
    scale_up_delay: float = 240.0
    error_backlog_threshold: float = math.inf
    tick_interval: float = 60.0
    max_instances: int | None = None

    def __post_init__(self):
        _check(self.min_instances >= 1, "min_instances", "must be >= 1", self.min_instances)
        _check(self.target_backlog_per_instance > 0, "target_backlog_per_instance", "must be > 0", self.target_backlog_per_instance)
        _check(self.scale_up_delay > 0, "scale_up_delay", "must be > 0", self.scale_up_delay)
        _check(self.error_backlog_threshold >= 0, "error_backlog_threshold", "must be >= 0", self.error_backlog_threshold)
        _check(self.tick_interval > 0, "tick_interval", "must be > 0", self.tick_interval)
        if self.max_instances is not None:
            _check(self.max_instances >= self.min_instances, "max_instances", "must be >= min_instances", self.max_instances)


@dataclass(slots=True)
class InstanceState:
    """Lifecycle record of one serving instance (mutable while a run is in progress)."""

    instance_id: int
    created_at: float
    warm_at: float | None = None
    busy_until: float = 0.0
    last_used: float = 0.0
    retired_at: float | None = None
    cold_starts_served: int = 0
    provisioned: bool = False
    requests_served: int = 0

    @property
    def live(self) -> bool:
        return self.retired_at is None

    def alive_at(self, t: float) -> bool:
        return self.created_at <= t and (self.retired_at is None or t < self.retired_at)
