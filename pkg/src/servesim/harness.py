"""Run and sweep drivers that turn scenarios into artifact directories.

A run directory holds::

    metrics.json         MetricsReport
    latency_series.csv   per-bucket mean latency and success ratio
    instance_series.csv  live instances per bucket
    records.csv          one row per request
    instances.csv        instance lifecycle log
    manifest.json        resolved scenario + seed (replayable with ``servesim run``)
    trace.csv            only when ``output.trace`` is set

Everything written is a pure function of the manifest, so two runs of the
same manifest produce byte-identical directories.
"""

from __future__ import annotations

import csv
import json
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__, analysis
from . import scenario as sc
from .simulate import RunResult, run_scenario

METRICS_FILE = "metrics.json"
LATENCY_FILE = "latency_series.csv"
INSTANCE_FILE = "instance_series.csv"
RECORDS_FILE = "records.csv"
INSTANCE_LOG_FILE = "instances.csv"
MANIFEST_FILE = "manifest.json"
TRACE_FILE = "trace.csv"

SWEEP_CSV = "sweep.csv"
SWEEP_HEADER = ["axis_value", "seed", "avg_latency_s", "success_ratio", "cost", "cold_starts"]
SWEEP_EXTRA = ["requests", "invocations"]


def manifest(spec: sc.ScenarioSpec, seed: int) -> dict:
    return {
        "generator": f"servesim {__version__}",
        "rng_algorithm": spec.rng_algorithm,
        "scenario": sc.to_dict(spec.with_seed(seed)),
        "seed": int(seed),
    }


def write_run(result: RunResult, out_dir, seed: int) -> analysis.MetricsReport:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = result.report()
    analysis.write_metrics_json(report, out / METRICS_FILE)
    analysis.write_latency_csv(report.latency_series, out / LATENCY_FILE)
    analysis.write_instance_csv(report.instance_series, out / INSTANCE_FILE)
    analysis.write_records_csv(result.records, out / RECORDS_FILE)
    analysis.write_instance_log(result.instances, out / INSTANCE_LOG_FILE)
    if result.sim is not None and result.spec.output.trace:
        result.sim.write_trace(out / TRACE_FILE)
    (out / MANIFEST_FILE).write_text(sc.dumps(manifest(result.spec, seed)), encoding="utf-8")
    return report


def run(spec: sc.ScenarioSpec, seed: int, out_dir=None, queue_factory=None) -> tuple[analysis.MetricsReport, RunResult]:
    """Simulate ``spec`` under ``seed``; write artifacts when ``out_dir`` is given."""
    if seed < 0:
        raise sc.ScenarioError(f"seed: must be a non-negative integer, got {seed}")
    seeded = spec.with_seed(seed)
    result = run_scenario(seeded, queue_factory=queue_factory)
    if out_dir is None:
        return result.report(), result
    return write_run(result, out_dir, seed), result


# sweeps ----------------------------------------------------------------------


@dataclass
class SweepRow:
    axis_value: object
    seed: int
    avg_latency_s: float | None
    success_ratio: float | None
    cost: float
    cold_starts: int
    requests: int
    invocations: int

    def cells(self) -> list:
        return [getattr(self, k) for k in SWEEP_HEADER + SWEEP_EXTRA]


@dataclass
class SweepFailure:
    axis_value: object
    seed: int
    error: str


@dataclass
class SweepResult:
    axis: str
    values: tuple
    seeds: tuple
    rows: list[SweepRow] = field(default_factory=list)
    failures: list[SweepFailure] = field(default_factory=list)

    def by_value(self, value) -> list[SweepRow]:
        return [r for r in self.rows if r.axis_value == value]

    def mean(self, value, column: str) -> float | None:
        xs = [getattr(r, column) for r in self.by_value(value)]
        xs = [x for x in xs if x is not None]
        return math.fsum(xs) / len(xs) if xs else None

    def compare(self) -> list[dict]:
        """Seed-averaged comparison across axis values (first value is the baseline)."""
        reps = []
        for v in self.values:
            rows = self.by_value(v)
            if not rows:
                continue
            reps.append(
                (
                    f"{self.axis}={v}",
                    analysis.MetricsReport(
                        avg_latency_success=self.mean(v, "avg_latency_s"),
                        success_ratio=self.mean(v, "success_ratio"),
                        total_cost=self.mean(v, "cost") or 0.0,
                        requests=sum(r.requests for r in rows),
                        cold_starts=sum(r.cold_starts for r in rows),
                        workload=",".join(str(r.seed) for r in rows),
                    ),
                )
            )
        if len(reps) < 2:
            return [
                {"system": name, "avg_latency_s": rep.avg_latency_success, "success_ratio": rep.success_ratio,
                 "cost": rep.total_cost, "latency_ratio": 1.0, "success_ratio_ratio": 1.0, "cost_ratio": 1.0,
                 "warning": ""}
                for name, rep in reps
            ]
        return analysis.compare_report(reps, baseline=0)


def _sweep_cell(args):
    spec, value, seed = args
    try:
        report, result = run(spec, seed)
    except Exception as exc:  # recorded, the sweep continues
        return value, seed, None, f"{type(exc).__name__}: {exc}"
    row = SweepRow(
        axis_value=value,
        seed=seed,
        avg_latency_s=report.avg_latency_success,
        success_ratio=report.success_ratio,
        cost=report.total_cost,
        cold_starts=result.cold_starts,
        requests=report.requests,
        invocations=report.invocations,
    )
    return value, seed, row, None


def sweep(spec: sc.SweepSpec, seeds: Sequence[int], out_dir=None, jobs: int = 1) -> SweepResult:
    """One run per (axis value, seed).

    Cells are independent, so ``jobs > 1`` farms them out to worker
    processes; this process stays the only writer.
    """
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise sc.ScenarioError("seeds: at least one seed is required")
    tasks = []
    failures = []
    for v in spec.values:
        try:
            cell = spec.cell(v)
        except sc.ScenarioError as exc:
            failures.extend(SweepFailure(v, s, str(exc)) for s in seeds)
            continue
        tasks.extend((cell, v, s) for s in seeds)

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_cell, tasks))
    else:
        outcomes = [_sweep_cell(t) for t in tasks]

    result = SweepResult(spec.axis, tuple(spec.values), seeds, failures=failures)
    for value, seed, row, err in outcomes:
        if row is None:
            result.failures.append(SweepFailure(value, seed, err))
        else:
            result.rows.append(row)
    order = {v: i for i, v in enumerate(spec.values)}
    result.rows.sort(key=lambda r: (order[r.axis_value], r.seed))
    result.failures.sort(key=lambda f: (order[f.axis_value], f.seed))
    if out_dir is not None:
        write_sweep(result, spec, out_dir)
    return result


def write_sweep(result: SweepResult, spec: sc.SweepSpec, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / SWEEP_CSV, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER + SWEEP_EXTRA)
        for r in result.rows:
            w.writerow([analysis._fmt(c) for c in r.cells()])
    rows = result.compare()
    (out / "compare.json").write_text(analysis.dumps(rows), encoding="utf-8")
    (out / "compare.txt").write_text(analysis.format_compare(rows) + "\n", encoding="utf-8")
    (out / "failures.json").write_text(
        analysis.dumps([{"axis_value": f.axis_value, "seed": f.seed, "error": f.error} for f in result.failures]),
        encoding="utf-8",
    )
    doc = {
        "generator": f"servesim {__version__}",
        "sweep": {"base": sc.to_dict(spec.base), "axis": spec.axis, "values": list(spec.values)},
        "seeds": list(result.seeds),
    }
    (out / MANIFEST_FILE).write_text(sc.dumps(json.loads(json.dumps(doc))), encoding="utf-8")


def format_error(exc: BaseException) -> str:
    return "".join(traceback.format_exception_only(type(exc), exc)).strip()
