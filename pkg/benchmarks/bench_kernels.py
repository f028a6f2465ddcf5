"""Steps per second of each flip-kernel backend on the 50x50 benchmark grid.

    python benchmarks/bench_kernels.py [--steps N] [--repeat R] [--csv out.csv]

Each backend starts from the same post-prerun plan and runs the same seeded
plain and anneal phases; both backends must end in the same plan.
"""

import argparse
import csv
import sys
import time

import numpy as np

from flipchain import AnnealSchedule, ChainConfig, Partition, PopModel, available_backends, generate_grid, initial_state
from flipchain.chain import advance


def timed(p, cfg, seed):
    rng = np.random.default_rng(seed)
    t = time.perf_counter()
    advance(p, cfg, rng)
    return time.perf_counter() - t


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--prerun", type=int, default=40_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)

    g = generate_grid(50, 50, PopModel.normal(100, 50), seed=1)
    start = initial_state(g, 18, seed=0, backend="python")
    advance(start, ChainConfig("prerun", args.prerun), np.random.default_rng(0))
    phases = {
        "plain": ChainConfig("plain", args.steps, trace_every=args.steps),
        "anneal": ChainConfig("anneal", args.steps, schedule=AnnealSchedule(0.0, 5.0), trace_every=args.steps),
    }
    rows = []
    finals = {}
    for name in sorted(available_backends()):
        for phase, cfg in phases.items():
            best = float("inf")
            for _ in range(args.repeat):
                p = Partition(g, start.assignment, 18, backend=name)
                best = min(best, timed(p, cfg, 1))
            finals[name, phase] = p.assignment
            rows.append({"backend": name, "phase": phase, "steps": args.steps,
                         "seconds": f"{best:.4f}", "steps_per_s": f"{args.steps / best:.0f}"})
            print(f"{name:>7} {phase:>7}: {args.steps / best:>12,.0f} steps/s", flush=True)
    names = sorted(available_backends())
    if len(names) == 2:
        for phase in phases:
            same = np.array_equal(finals[names[0], phase], finals[names[1], phase])
            print(f"{phase}: backends agree = {same}")
        rate = {r["backend"]: float(r["steps_per_s"]) for r in rows if r["phase"] == "plain"}
        print(f"speedup (plain): {rate['cython'] / rate['python']:.0f}x")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
