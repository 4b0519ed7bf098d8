"""Compare the compiled and pure-Python event queues.

Two measurements per backend:

* a hold-model microbenchmark (pop one event, push one event at a random
  future time) against a queue kept at a fixed size;
* an end-to-end scenario run, which includes all platform bookkeeping.

    python benchmarks/bench_engine.py --events 200000 --preset aws-tf-mobilenet-w200
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from servesim import scenario
from servesim.engine import CEventQueue, PyEventQueue
from servesim.simulate import run_scenario


def hold(queue_cls, size: int, events: int, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(1.0, size + events).tolist()
    q = queue_cls()
    for i in range(size):
        q.schedule(gaps[i], 0, i)
    t0 = time.perf_counter()
    for i in range(size, size + events):
        t, _, _, payload = q.pop()
        q.schedule(t + gaps[i], 0, payload)
    return time.perf_counter() - t0


def scenario_run(queue_cls, preset_id: str, seed: int) -> tuple[float, int]:
    spec = scenario.preset(preset_id).with_seed(seed)
    t0 = time.perf_counter()
    res = run_scenario(spec, queue_factory=queue_cls)
    return time.perf_counter() - t0, res.event_count


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=200_000)
    ap.add_argument("--size", type=int, default=1_000, help="standing queue length for the hold model")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--preset", default="aws-tf-mobilenet-w200")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    backends = [("python", PyEventQueue)]
    if CEventQueue is not None:
        backends.append(("cython", CEventQueue))
    else:
        print("compiled queue not built; run `python setup.py build_ext --inplace` to include it")

    results = {}
    for name, cls in backends:
        h = min(hold(cls, args.size, args.events) for _ in range(args.repeat))
        runs = [scenario_run(cls, args.preset, args.seed) for _ in range(args.repeat)]
        s = statistics.median(r[0] for r in runs)
        results[name] = (h, s, runs[0][1])
        print(
            f"{name:>7}: hold {args.events / h / 1e6:6.2f} M ops/s ({h * 1e9 / args.events:6.0f} ns/op)   "
            f"{args.preset}: {s:6.2f} s for {runs[0][1]} events"
        )
    if len(results) == 2:
        hp, sp, _ = results["python"]
        hc, scy, _ = results["cython"]
        print(f"speed-up: hold model {hp / hc:.2f}x, full scenario {sp / scy:.2f}x")


if __name__ == "__main__":
    main()
