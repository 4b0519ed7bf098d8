"""Cold-start stage arithmetic and warm service time."""

from __future__ import annotations

import math

import numpy as np

from .profiles import ColdStartProfile, ModelProfile, RuntimeProfile, ServerlessConfig

STAGES = ("container", "image_pull", "import", "download", "load", "predict")
# Stages that run inside the function handler and are therefore billed.
BILLED_STAGES = ("import", "download", "load", "predict")


def memory_factor(config: ServerlessConfig, model: ModelProfile | None = None) -> float:
    """Compute-share multiplier on prediction time.

    CPU share grows linearly with configured memory up to a saturation point,
    so predict time scales as ``reference / min(memory, saturation)``.
    """
    sat = config.memory_saturation_gb
    if sat is None:
        sat = model.memory_saturation_gb if model is not None else math.inf
    return config.memory_reference_gb / min(config.memory_gb, sat)


def predict_component(
    model: ModelProfile,
    runtime: RuntimeProfile,
    config: ServerlessConfig,
    n_inferences: int = 1,
    batch_count: int = 1,
) -> float:
    if n_inferences < 1:
        raise ValueError(f"n_inferences: must be >= 1, got {n_inferences}")
    if batch_count < 1:
        raise ValueError(f"batch_count: must be >= 1, got {batch_count}")
    return n_inferences * batch_count * model.predict_warm * runtime.predict_scale * memory_factor(config, model)


def warm_service_time(
    model: ModelProfile,
    runtime: RuntimeProfile,
    config: ServerlessConfig,
    n_inferences: int = 1,
    batch_count: int = 1,
) -> float:
    return config.network_overhead + predict_component(model, runtime, config, n_inferences, batch_count)


def cold_start_duration(
    model: ModelProfile,
    runtime: RuntimeProfile,
    cold: ColdStartProfile,
    extra_download_bytes: float = 0.0,
    rng: np.random.Generator | None = None,
    predict: float | None = None,
) -> tuple[float, dict[str, float]]:
    """Total cold-start latency and its per-stage breakdown.

    ``predict`` overrides the first-prediction time (defaults to the
    reference-memory single-sample value plus the lazy-initialisation extra).
    The image-pull stage is taken with probability
    ``cold.image_pull_probability`` using ``rng``; without an rng it is skipped.
    """
    if extra_download_bytes < 0:
        raise ValueError(f"extra_download_bytes: must be >= 0, got {extra_download_bytes}")
    pull = 0.0
    if rng is not None and cold.image_pull_probability > 0 and rng.random() < cold.image_pull_probability:
        pull = cold.image_pull_seconds
    to_fetch = extra_download_bytes if model.packed_in_image else model.artifact_bytes + extra_download_bytes
    if predict is None:
        predict = model.predict_warm * runtime.predict_scale + model.predict_cold_extra
    stages = {
        "container": cold.container_overhead,
        "image_pull": pull,
        "import": runtime.import_time,
        "download": to_fetch / cold.download_bandwidth,
        "load": runtime.model_load_time(model),
        "predict": predict,
    }
    return math.fsum(stages.values()), stages


def billed_cold_duration(stages: dict[str, float]) -> float:
    return math.fsum(stages[s] for s in BILLED_STAGES)
