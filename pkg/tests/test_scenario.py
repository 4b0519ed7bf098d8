import json
import math

import pytest

from servesim import scenario as sc
from servesim.billing import HourlyPricing, ServerlessPricing


def test_preset_basics():
    spec = sc.preset("aws-tf-mobilenet-w40")
    assert spec.workload.mmpp.lambda_high == 40
    assert spec.serverless.memory_gb == 2.0
    assert spec.runtime.name == "tf"
    assert spec.platform == "serverless"
    assert isinstance(spec.pricing, ServerlessPricing)


@pytest.mark.parametrize("system,kind", [("managed", "managed"), ("cpu", "dedicated"), ("gpu", "dedicated")])
def test_server_presets_use_hourly_pricing(system, kind):
    spec = sc.preset(f"gcp-{system}-albert-w120")
    assert spec.platform == kind
    assert isinstance(spec.pricing, HourlyPricing)


def test_every_preset_id_resolves():
    ids = sc.preset_ids()
    assert len(ids) == len(set(ids)) == 2 * 5 * 3 * 3
    for pid in ids:
        assert sc.preset(pid).name == pid
    assert set(sc.CORE_PRESETS) <= set(ids)
    assert len(sc.CORE_PRESETS) == 24


@pytest.mark.parametrize("bad", ["aws-tf-mobilenet", "azure-tf-mobilenet-w40", "aws-tf-resnet-w40", "aws-tf-vgg-w50"])
def test_bad_preset_ids(bad):
    with pytest.raises(sc.ScenarioError, match="preset"):
        sc.preset(bad)


def test_negative_memory_names_the_field(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"preset": "aws-tf-mobilenet-w40", "platform": {"serverless": {"memory_gb": -1}}}))
    with pytest.raises(sc.ScenarioError, match="memory_gb"):
        sc.load_scenario(path)


def test_unknown_field_named(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"preset": "aws-tf-mobilenet-w40", "workload": {"durtion": 5}}))
    with pytest.raises(sc.ScenarioError, match="workload.durtion"):
        sc.load_scenario(path)


def test_type_errors_named(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"preset": "aws-tf-mobilenet-w40", "workload": {"num_clients": "eight"}}))
    with pytest.raises(sc.ScenarioError, match="workload.num_clients"):
        sc.load_scenario(path)


def test_malformed_json(tmp_path):
    path = tmp_path / "s.json"
    path.write_text("{not json")
    with pytest.raises(sc.ScenarioError, match="JSON"):
        sc.load_scenario(path)


def test_minimal_file_equals_spelled_out_file(tmp_path):
    short = tmp_path / "short.json"
    short.write_text(json.dumps({"preset": "gcp-ort-vgg-w120"}))
    full = tmp_path / "full.json"
    full.write_text(sc.dumps(sc.preset_dict("gcp-ort-vgg-w120")))
    assert sc.load_scenario(short) == sc.load_scenario(full)


@pytest.mark.parametrize("pid", ["aws-tf-vgg-w200", "gcp-managed-albert-w40", "aws-cpu-mobilenet-w120"])
def test_to_dict_round_trip(pid):
    spec = sc.preset(pid)
    doc = json.loads(json.dumps(sc.to_dict(spec)))
    assert sc.from_dict(doc) == spec


def test_infinite_values_survive_json():
    spec = sc.preset("aws-managed-mobilenet-w40", platform={"managed": {"error_backlog_threshold": "inf"}})
    assert spec.managed.error_backlog_threshold == math.inf
    doc = json.loads(json.dumps(sc.to_dict(spec)))
    assert sc.from_dict(doc).managed.error_backlog_threshold == math.inf


def test_bare_preset_id_loads():
    assert sc.load_scenario("aws-gpu-vgg-w200") == sc.preset("aws-gpu-vgg-w200")
    with pytest.raises(sc.ScenarioError):
        sc.load_scenario("missing-file.json")


def test_overrides_deep_merge():
    spec = sc.preset("aws-ort-vgg-w120", platform={"serverless": {"memory_gb": 4}}, workload={"seed": 3})
    assert spec.serverless.memory_gb == 4.0
    assert spec.serverless.idle_timeout == 600.0
    assert spec.workload.seed == 3


def test_sweep_cells_change_one_axis():
    sw = sc.SweepSpec(sc.preset("aws-tf-mobilenet-w120"), "batch_size", (1, 2, 4))
    assert [sw.cell(v).workload.batch_size for v in sw.values] == [1, 2, 4]
    assert sw.cell(2).serverless == sw.base.serverless


def test_sweep_validation():
    base = sc.preset("aws-cpu-mobilenet-w40")
    with pytest.raises(ValueError, match="axis"):
        sc.SweepSpec(base, "memory_gb", (2,))
    with pytest.raises(ValueError, match="axis"):
        sc.SweepSpec(base, "colour", (2,))
    with pytest.raises(ValueError, match="values"):
        sc.SweepSpec(sc.preset("aws-tf-vgg-w40"), "memory_gb", ())
    with pytest.raises(sc.ScenarioError, match="memory_gb"):
        sc.sweep_from_dict({"base": "aws-tf-vgg-w40", "axis": "memory_gb", "values": [2, 0]})


def test_load_workload_variants(tmp_path):
    assert sc.load_workload("aws-tf-mobilenet-w120").mmpp.lambda_high == 120
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"mmpp": {"lambda_low": 1, "lambda_high": 2, "mean_dwell_low": 3, "mean_dwell_high": 4}, "duration": 60}))
    w = sc.load_workload(path)
    assert w.duration == 60 and w.mmpp.mean_dwell_high == 4
