from .coldstart import (
    BILLED_STAGES,
    STAGES,
    billed_cold_duration,
    cold_start_duration,
    memory_factor,
    predict_component,
    warm_service_time,
)
from .dedicated import DedicatedPlatform, WorkerPool, mm1_mean_sojourn
from .managed import ManagedPlatform, ScaleAction, managed_autoscale_step
from .profiles import (
    ColdStartProfile,
    DedicatedServerConfig,
    InstanceState,
    ManagedConfig,
    ModelProfile,
    RuntimeProfile,
    ServerlessConfig,
)
from .serverless import Fleet, Route, ServerlessPlatform, provisioned_pool_init, serverless_dispatch, serverless_reap_idle

__all__ = [
    "BILLED_STAGES",
    "STAGES",
    "ColdStartProfile",
    "DedicatedPlatform",
    "DedicatedServerConfig",
    "Fleet",
    "InstanceState",
    "ManagedConfig",
    "ManagedPlatform",
    "ModelProfile",
    "Route",
    "RuntimeProfile",
    "ScaleAction",
    "ServerlessConfig",
    "ServerlessPlatform",
    "WorkerPool",
    "billed_cold_duration",
    "cold_start_duration",
    "managed_autoscale_step",
    "memory_factor",
    "mm1_mean_sojourn",
    "predict_component",
    "provisioned_pool_init",
    "serverless_dispatch",
    "serverless_reap_idle",
    "warm_service_time",
]
