"""Scenario files: preset catalog, override merging, validation and round-tripping.

A scenario is plain JSON. It may name a ``preset`` and override any subset of
fields; the loader expands the preset into a fully spelled-out document, deep
merges the overrides, and builds validated value objects. ``to_dict`` emits
the fully spelled-out form, so ``from_dict(to_dict(s)) == s``.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

from . import rng as rngmod
from .billing import HourlyPricing, ServerlessPricing
from .platforms.profiles import (
    ColdStartProfile,
    DedicatedServerConfig,
    ManagedConfig,
    ModelProfile,
    RuntimeProfile,
    ServerlessConfig,
)
from .workload import MmppParams, WorkloadSpec

PLATFORM_KINDS = ("serverless", "managed", "dedicated")
SYSTEMS = ("tf", "ort", "managed", "cpu", "gpu")
CLOUDS = ("aws", "gcp")
MODELS = ("mobilenet", "albert", "vgg")
WORKLOADS = ("w40", "w120", "w200")

SWEEP_AXES = {
    "memory_gb": ("platform", "serverless", "memory_gb"),
    "provisioned_concurrency": ("platform", "serverless", "provisioned_concurrency"),
    "batch_size": ("workload", "batch_size"),
    "container_image_bytes": ("platform", "cold_start", "container_image_bytes"),
    "extra_download_bytes": ("platform", "serverless", "extra_download_bytes"),
    "n_inferences": ("platform", "serverless", "n_inferences"),
}

# The reproduction set: every system/model/workload cell with a reported
# measurement that the acceptance suite and the benchmark sweep exercise.
CORE_PRESETS = [
    f"{cloud}-{cell}"
    for cloud in CLOUDS
    for cell in (
        "tf-mobilenet-w40", "tf-mobilenet-w120", "tf-mobilenet-w200",
        "tf-albert-w120", "tf-vgg-w40",
        "ort-mobilenet-w120", "ort-vgg-w120",
        "managed-mobilenet-w40", "managed-mobilenet-w120",
        "cpu-mobilenet-w40", "cpu-mobilenet-w120",
        "gpu-mobilenet-w200",
    )
]


class ScenarioError(ValueError):
    """Invalid scenario; the message starts with the offending field path."""


# --------------------------------------------------------------------------- value types


@dataclass(frozen=True)
class OutputControls:
    latency_bucket: float = 10.0
    instance_bucket: float = 60.0
    trace: bool = False

    def __post_init__(self):
        if not self.latency_bucket > 0:
            raise ValueError(f"latency_bucket: must be > 0, got {self.latency_bucket}")
        if not self.instance_bucket > 0:
            raise ValueError(f"instance_bucket: must be > 0, got {self.instance_bucket}")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    workload: WorkloadSpec
    platform: str
    model: ModelProfile
    runtime: RuntimeProfile
    pricing: ServerlessPricing | HourlyPricing
    serverless: ServerlessConfig | None = None
    cold_start: ColdStartProfile | None = None
    managed: ManagedConfig | None = None
    dedicated: DedicatedServerConfig | None = None
    output: OutputControls = field(default_factory=OutputControls)
    rng_algorithm: str = rngmod.RNG_ALGORITHM

    def __post_init__(self):
        if self.platform not in PLATFORM_KINDS:
            raise ValueError(f"platform.kind: must be one of {PLATFORM_KINDS}, got {self.platform!r}")
        want = ServerlessPricing if self.platform == "serverless" else HourlyPricing
        if not isinstance(self.pricing, want):
            raise ValueError(f"pricing.kind: {self.platform} platform needs {want.__name__}")
        if self.platform == "serverless" and (self.serverless is None or self.cold_start is None):
            raise ValueError("platform.serverless: serverless platform needs serverless and cold_start blocks")
        if self.platform == "managed" and self.managed is None:
            raise ValueError("platform.managed: managed platform needs a managed block")
        if self.platform == "dedicated" and self.dedicated is None:
            raise ValueError("platform.dedicated: dedicated platform needs a dedicated block")

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return dataclasses.replace(self, workload=dataclasses.replace(self.workload, seed=int(seed)))

    @property
    def memory_gb(self) -> float:
        return self.serverless.memory_gb if self.serverless is not None else 0.0

    @property
    def workload_label(self) -> str:
        w = self.workload
        return f"mmpp({w.mmpp.lambda_low:g},{w.mmpp.lambda_high:g})x{w.duration:g}s/seed{w.seed}"


# --------------------------------------------------------------------------- JSON helpers


def _enc(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _dec_float(v, path):
    if isinstance(v, bool):
        raise ScenarioError(f"{path}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity", "+inf"):
        return math.inf
    raise ScenarioError(f"{path}: expected a number, got {v!r}")


def _dec_int(v, path):
    if isinstance(v, bool):
        raise ScenarioError(f"{path}: expected an integer, got {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, float) and v.is_integer():
        return int(v)
    raise ScenarioError(f"{path}: expected an integer, got {v!r}")


def _strip_notes(obj):
    if isinstance(obj, dict):
        return {k: _strip_notes(v) for k, v in obj.items() if not k.startswith("_")}
    if isinstance(obj, list):
        return [_strip_notes(v) for v in obj]
    return obj


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def set_path(doc: dict, path: tuple, value) -> dict:
    out = copy.deepcopy(doc)
    node = out
    for k in path[:-1]:
        node = node.setdefault(k, {})
    node[path[-1]] = value
    return out


# --------------------------------------------------------------------------- dataclass (de)serialisation

_FLOAT_TYPES = {"float", "float | None"}
_INT_TYPES = {"int", "int | None"}


def _build(cls, data: Any, path: str):
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected an object, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ScenarioError(f"{path}.{unknown[0]}: unknown field")
    kwargs = {}
    for name, v in data.items():
        t = str(fields[name].type)
        p = f"{path}.{name}"
        if v is None:
            if "None" not in t:
                raise ScenarioError(f"{p}: must not be null")
            kwargs[name] = None
        elif t in _FLOAT_TYPES:
            kwargs[name] = _dec_float(v, p)
        elif t in _INT_TYPES:
            kwargs[name] = _dec_int(v, p)
        elif t == "bool":
            if not isinstance(v, bool):
                raise ScenarioError(f"{p}: expected true/false, got {v!r}")
            kwargs[name] = v
        elif t == "str":
            if not isinstance(v, str):
                raise ScenarioError(f"{p}: expected a string, got {v!r}")
            kwargs[name] = v
        else:
            kwargs[name] = v
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"{path}.{exc}") from None
    except TypeError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _flat(obj) -> dict:
    return {f.name: _enc(getattr(obj, f.name)) for f in dataclasses.fields(obj)}


def to_dict(spec: ScenarioSpec) -> dict:
    w = spec.workload
    wd = _flat(w)
    wd["mmpp"] = _flat(w.mmpp)
    platform: dict = {"kind": spec.platform}
    if spec.serverless is not None:
        platform["serverless"] = _flat(spec.serverless)
    if spec.cold_start is not None:
        platform["cold_start"] = _flat(spec.cold_start)
    if spec.managed is not None:
        md = _flat(spec.managed)
        md["base"] = _flat(spec.managed.base)
        platform["managed"] = md
    if spec.dedicated is not None:
        platform["dedicated"] = _flat(spec.dedicated)
    pricing = _flat(spec.pricing)
    pricing["kind"] = "serverless" if isinstance(spec.pricing, ServerlessPricing) else "hourly"
    return {
        "name": spec.name,
        "rng_algorithm": spec.rng_algorithm,
        "workload": wd,
        "model": _flat(spec.model),
        "runtime": _flat(spec.runtime),
        "platform": platform,
        "pricing": pricing,
        "output": _flat(spec.output),
    }


_TOP_KEYS = {"preset", "name", "rng_algorithm", "workload", "model", "runtime", "platform", "pricing", "output"}


def from_dict(doc: dict) -> ScenarioSpec:
    """Validate a scenario document (presets are expanded first)."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario: expected a JSON object")
    doc = _strip_notes(doc)
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise ScenarioError(f"{unknown[0]}: unknown field")
    if "preset" in doc:
        preset = doc["preset"]
        if not isinstance(preset, str):
            raise ScenarioError(f"preset: expected a preset id string, got {preset!r}")
        base = preset_dict(preset)
        doc = deep_merge(base, {k: v for k, v in doc.items() if k != "preset"})
    for key in ("workload", "model", "runtime", "platform", "pricing"):
        if key not in doc:
            raise ScenarioError(f"{key}: missing (give it explicitly or name a preset)")

    wd = dict(doc["workload"])
    if "mmpp" not in wd:
        raise ScenarioError("workload.mmpp: missing")
    mmpp = _build(MmppParams, wd.pop("mmpp"), "workload.mmpp")
    wd["mmpp"] = mmpp
    if "seed" in wd:
        wd["seed"] = _dec_int(wd["seed"], "workload.seed")
    workload = _build_workload(wd)

    model = _build(ModelProfile, doc["model"], "model")
    runtime = _build(RuntimeProfile, doc["runtime"], "runtime")

    pd = doc["platform"]
    if not isinstance(pd, dict):
        raise ScenarioError("platform: expected an object")
    kind = pd.get("kind")
    if kind not in PLATFORM_KINDS:
        raise ScenarioError(f"platform.kind: must be one of {PLATFORM_KINDS}, got {kind!r}")
    extra = sorted(set(pd) - {"kind", "serverless", "cold_start", "managed", "dedicated"})
    if extra:
        raise ScenarioError(f"platform.{extra[0]}: unknown field")
    serverless = cold = managed = dedicated = None
    if kind == "serverless":
        serverless = _build(ServerlessConfig, pd.get("serverless", {}), "platform.serverless")
        cold = _build(ColdStartProfile, pd.get("cold_start", {}), "platform.cold_start")
    elif kind == "managed":
        md = dict(pd.get("managed", {}))
        base = _build(DedicatedServerConfig, md.pop("base", {}), "platform.managed.base")
        managed = _build(ManagedConfig, md, "platform.managed")
        managed = dataclasses.replace(managed, base=base)
    else:
        dedicated = _build(DedicatedServerConfig, pd.get("dedicated", {}), "platform.dedicated")

    prd = dict(doc["pricing"])
    pkind = prd.pop("kind", "serverless" if kind == "serverless" else "hourly")
    if pkind == "serverless":
        pricing = _build(ServerlessPricing, prd, "pricing")
    elif pkind == "hourly":
        pricing = _build(HourlyPricing, prd, "pricing")
    else:
        raise ScenarioError(f"pricing.kind: must be 'serverless' or 'hourly', got {pkind!r}")

    output = _build(OutputControls, doc.get("output", {}), "output")
    name = doc.get("name", "custom")
    algo = doc.get("rng_algorithm", rngmod.RNG_ALGORITHM)
    if algo != rngmod.RNG_ALGORITHM:
        raise ScenarioError(f"rng_algorithm: only {rngmod.RNG_ALGORITHM!r} is implemented, got {algo!r}")
    try:
        return ScenarioSpec(
            name=str(name), workload=workload, platform=kind, model=model, runtime=runtime,
            pricing=pricing, serverless=serverless, cold_start=cold, managed=managed,
            dedicated=dedicated, output=output, rng_algorithm=algo,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def _build_workload(wd: dict) -> WorkloadSpec:
    # ``mmpp`` is already a validated MmppParams; the other fields are checked here.
    return _build(WorkloadSpec, wd, "workload")


# --------------------------------------------------------------------------- preset catalog


@lru_cache(maxsize=1)
def catalog() -> dict:
    text = resources.files("servesim").joinpath("presets/catalog.json").read_text(encoding="utf-8")
    return json.loads(text)


def parse_preset_id(preset_id: str) -> tuple[str, str, str, str]:
    parts = preset_id.split("-")
    if len(parts) != 4:
        raise ScenarioError(f"preset: {preset_id!r} is not of the form cloud-system-model-workload")
    cloud, system, model, wl = parts
    for value, allowed, what in (
        (cloud, CLOUDS, "cloud"), (system, SYSTEMS, "system"), (model, MODELS, "model"), (wl, WORKLOADS, "workload"),
    ):
        if value not in allowed:
            raise ScenarioError(f"preset: unknown {what} {value!r} in {preset_id!r} (choose from {', '.join(allowed)})")
    return cloud, system, model, wl


def preset_ids() -> list[str]:
    return [f"{c}-{s}-{m}-{w}" for c in CLOUDS for s in SYSTEMS for m in MODELS for w in WORKLOADS]


def preset_dict(preset_id: str) -> dict:
    """Fully spelled-out scenario document for a preset id."""
    cloud, system, model_name, wl = parse_preset_id(preset_id)
    cat = _strip_notes(catalog())
    c = cat["clouds"][cloud]
    m = dict(cat["models"][model_name])
    packed = model_name in c["packed_in_image"]
    runtime_name = system if system in ("tf", "ort") else "tf"
    rt = c["runtimes"][runtime_name]
    rt_model = rt["models"][model_name]

    workload = dict(cat["workload_defaults"])
    workload["mmpp"] = dict(cat["workloads"][wl])
    workload.update({"seed": 0, "batch_size": 1, "payload_bytes": int(m["input_bytes"])})

    model = {
        "name": model_name,
        "artifact_bytes": m["artifact_bytes"],
        "packed_in_image": packed,
        "predict_warm": m["predict_warm"],
        "predict_cold_extra": rt_model["predict_cold_extra"],
        "input_bytes": int(m["input_bytes"]),
        "memory_saturation_gb": m["memory_saturation_gb"],
    }
    runtime = {
        "name": runtime_name,
        "import_time": rt["import_time"],
        "load_time": rt_model["load_time"],
        "predict_scale": rt["predict_scale"],
        "load_time_per_mb": 0.0,
    }
    if system in ("tf", "ort"):
        image = rt["container_image_bytes"] + (m["artifact_bytes"] if packed else 0.0)
        platform = {
            "kind": "serverless",
            "serverless": _flat(ServerlessConfig(**c["serverless"])),
            "cold_start": _flat(ColdStartProfile(**c["cold_start"], container_image_bytes=image)),
        }
        pricing = {"kind": "serverless", **_flat(ServerlessPricing(**c["serverless_pricing"]))}
    else:
        block = dict(c[system])
        per_hour = block.pop("per_hour")
        service = block.pop("service_time")[model_name]
        base_keys = {"workers", "request_timeout", "queue_capacity", "service_distribution", "network_overhead"}
        base = DedicatedServerConfig(service_time=service, **{k: v for k, v in block.items() if k in base_keys})
        if system == "managed":
            mc = ManagedConfig(base=base, **{k: v for k, v in block.items() if k not in base_keys})
            md = _flat(mc)
            md["base"] = _flat(base)
            platform = {"kind": "managed", "managed": md}
        else:
            platform = {"kind": "dedicated", "dedicated": _flat(base)}
        pricing = {"kind": "hourly", "per_hour": per_hour}
    doc = {
        "name": preset_id,
        "rng_algorithm": rngmod.RNG_ALGORITHM,
        "workload": workload,
        "model": model,
        "runtime": runtime,
        "platform": platform,
        "pricing": pricing,
        "output": _flat(OutputControls()),
    }
    return json.loads(json.dumps(doc))


def preset(preset_id: str, **overrides) -> ScenarioSpec:
    doc = {"preset": preset_id}
    if overrides:
        doc = deep_merge(doc, overrides)
    return from_dict(doc)


def load_scenario(path) -> ScenarioSpec:
    """Load a scenario file, or a bare preset id."""
    p = Path(path)
    if not p.exists():
        if isinstance(path, str) and path.count("-") == 3 and not path.endswith(".json"):
            return from_dict({"preset": path})
        raise ScenarioError(f"scenario: file not found: {path}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario: {p.name} is not valid JSON ({exc})") from None
    if isinstance(doc, dict) and "scenario" in doc and "seed" in doc and set(doc) >= {"scenario", "seed"}:
        # a run manifest: replay its resolved scenario
        return from_dict(doc["scenario"]).with_seed(doc["seed"])
    return from_dict(doc)


def workload_from_dict(doc: dict) -> WorkloadSpec:
    if not isinstance(doc, dict):
        raise ScenarioError("workload: expected a JSON object")
    wd = _strip_notes(dict(doc))
    if "mmpp" not in wd:
        raise ScenarioError("workload.mmpp: missing")
    wd["mmpp"] = _build(MmppParams, wd["mmpp"], "workload.mmpp")
    return _build_workload(wd)


def load_workload(path) -> WorkloadSpec:
    """Workload of a preset id, a scenario file, or a bare workload document."""
    p = Path(path)
    if not p.exists():
        return load_scenario(path).workload
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"workload: {p.name} is not valid JSON ({exc})") from None
    if isinstance(doc, dict) and "mmpp" in doc:
        return workload_from_dict(doc)
    return load_scenario(p).workload


# --------------------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioSpec
    axis: str
    values: tuple

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"axis: must be one of {sorted(SWEEP_AXES)}, got {self.axis!r}")
        if not self.values:
            raise ValueError("values: must be non-empty")
        path = SWEEP_AXES[self.axis]
        if path[0] == "platform" and self.base.platform != "serverless":
            raise ValueError(f"axis: {self.axis} only applies to serverless scenarios")

    def cell(self, value) -> ScenarioSpec:
        doc = set_path(to_dict(self.base), SWEEP_AXES[self.axis], value)
        try:
            return from_dict(doc)
        except ScenarioError as exc:
            raise ScenarioError(f"values[{value!r}]: {exc}") from None


def sweep_from_dict(doc: dict) -> SweepSpec:
    if not isinstance(doc, dict):
        raise ScenarioError("sweep: expected a JSON object")
    for key in ("base", "axis", "values"):
        if key not in doc:
            raise ScenarioError(f"{key}: missing")
    base = doc["base"]
    base = from_dict({"preset": base} if isinstance(base, str) else base)
    values = doc["values"]
    if not isinstance(values, list):
        raise ScenarioError("values: expected a list")
    try:
        sw = SweepSpec(base, doc["axis"], tuple(values))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    for v in sw.values:
        sw.cell(v)  # validate every cell up front
    return sw


def load_sweep(path) -> SweepSpec:
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"sweep: file not found: {path}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"sweep: {p.name} is not valid JSON ({exc})") from None
    return sweep_from_dict(doc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
