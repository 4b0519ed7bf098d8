"""``servesim`` command line.

Exit status: 0 on success, 1 when the input fails validation, 2 when the
simulation or file I/O fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__, analysis, harness
from . import scenario as sc
from . import workload as wl
from .engine import BACKEND
from .simulate import ConfigurationError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; here 2 is reserved for runtime failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _parse_seeds(text: str) -> list[int]:
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds or any(s < 0 for s in seeds):
        raise UsageError(f"--seeds: expected non-negative integers like 1,2,3 or 1..5, got {text!r}")
    return seeds


def _manifest_seed(path: str) -> int | None:
    p = Path(path)
    if not p.is_file():
        return None
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None
    if isinstance(doc, dict) and "scenario" in doc and "seed" in doc:
        return int(doc["seed"])
    return None


def cmd_run(args) -> int:
    spec = sc.load_scenario(args.scenario)
    seed = args.seed if args.seed is not None else _manifest_seed(args.scenario)
    if seed is None:
        raise UsageError("--seed: required (seeds are never chosen implicitly)")
    report, result = harness.run(spec, seed, args.out)
    lat = "n/a" if report.avg_latency_success is None else f"{report.avg_latency_success:.4f}s"
    sr = "n/a" if report.success_ratio is None else f"{report.success_ratio:.4f}"
    print(
        f"{spec.name} seed={seed}: requests={report.requests} avg_latency={lat} success_ratio={sr} "
        f"cost=${report.total_cost:.4f} cold_starts={result.cold_starts} events={result.event_count} -> {args.out}"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = sc.load_sweep(args.sweepfile)
    seeds = _parse_seeds(args.seeds)
    result = harness.sweep(spec, seeds, args.out, jobs=args.jobs)
    print(analysis.format_compare(result.compare()))
    print(f"{len(result.rows)} rows written to {Path(args.out) / harness.SWEEP_CSV}; {len(result.failures)} failed cells")
    for f in result.failures:
        print(f"  failed: {spec.axis}={f.axis_value} seed={f.seed}: {f.error}", file=sys.stderr)
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.action == "list":
        marked = set(sc.CORE_PRESETS)
        for pid in sc.preset_ids():
            if args.all or pid in marked:
                kind = sc.preset_dict(pid)["platform"]["kind"]
                tag = "" if pid in marked else "\t(extra)"
                print(f"{pid}\t{kind}{tag}")
        return EXIT_OK
    if not args.preset_id:
        raise UsageError("presets show: a preset id is required")
    print(sc.dumps(sc.preset_dict(args.preset_id)), end="")
    return EXIT_OK


def cmd_workload(args) -> int:
    spec = sc.load_workload(args.spec)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    events = wl.generate_arrivals(spec)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        wl.write_csv(events, fh)
    print(f"{len(events)} requests over {spec.duration:g}s (seed {spec.seed}) -> {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    if len(args.reports) < 2:
        raise UsageError("compare: give at least two report files")
    reports = []
    for path in args.reports:
        p = Path(path)
        if p.is_dir():
            p = p / harness.METRICS_FILE
        try:
            rep = analysis.read_metrics_json(p)
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise UsageError(f"compare: {p} is not a metrics report ({exc})") from None
        reports.append((rep.label or p.parent.name or p.stem, rep))
    names = [n for n, _ in reports]
    if len(set(names)) != len(names):
        reports = [(str(path), rep) for path, (_, rep) in zip(args.reports, reports)]
    baseline = args.baseline
    if baseline is not None and baseline.isdigit():
        baseline = int(baseline)
    rows = analysis.compare_report(reports, baseline if baseline is not None else 0)
    print(analysis.format_compare(rows))
    if args.out:
        Path(args.out).write_text(analysis.dumps(rows), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="servesim", description="Simulate serverless and server-based model serving.")
    ap.add_argument("--version", action="version", version=f"servesim {__version__} (event queue: {BACKEND})")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="simulate one scenario and write its artifacts")
    p.add_argument("scenario", help="scenario JSON, run manifest, or preset id such as aws-tf-mobilenet-w40")
    p.add_argument("--seed", type=int, help="random seed (taken from the manifest when replaying one)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a scenario across the values of one axis")
    p.add_argument("sweepfile", help='JSON with "base" (preset id or scenario), "axis" and "values"')
    p.add_argument("--seeds", required=True, help="comma list, ranges allowed: 1,2,3 or 1..5")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("presets", help="list or show bundled presets")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("preset_id", nargs="?")
    p.add_argument("--all", action="store_true", help="include every cloud/system/model/workload combination")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("workload", help="workload utilities")
    p.add_argument("action", choices=("gen",))
    p.add_argument("spec", help="workload JSON, scenario JSON, or preset id")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_workload)

    p = sub.add_parser("compare", help="side-by-side table of metrics reports")
    p.add_argument("reports", nargs="+", help="metrics.json files or run directories")
    p.add_argument("--baseline", help="index or label of the baseline report (default: first)")
    p.add_argument("--out", help="also write the table as JSON")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except (sc.ScenarioError, ConfigurationError, UsageError) as exc:
        print(f"servesim: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"servesim: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # simulation or I/O failure
        print(f"servesim: error: {harness.format_error(exc)}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
