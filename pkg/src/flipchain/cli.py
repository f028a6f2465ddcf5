"""Command-line interface.

Exit codes: 0 success, 1 I/O or data error, 2 usage error, 3 check failed.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from .chain import AnnealSchedule, ChainConfig, ConstraintGates, run
from .graph import GraphFormatError, PopModel, generate_grid, read_graph_file, save_graph
from .oracle import InstanceTooLarge, StateIndex, enumerate_partitions, uniformity_check
from .partition import load_partition, save_partition
from .render import RenderSpec, render_svg
from .scoring import ScoreWeights, evaluate_election, load_votes

UNIFORMITY_TV_MAX = 0.05


class DataError(Exception):
    pass


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _suffixed(path: Optional[str], i: int, n: int) -> Optional[str]:
    if path is None or n == 1 or path == "-":
        return path
    return f"{path}.{i}"


def _pop_model(text: str) -> PopModel:
    try:
        return PopModel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _weights(text: str) -> ScoreWeights:
    try:
        return ScoreWeights.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on|off")
    return text == "on"


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _load_graph(path: str):
    try:
        return read_graph_file(path)
    except OSError as exc:
        raise DataError(f"cannot read graph {path}: {exc.strerror or exc}") from None
    except GraphFormatError as exc:
        raise DataError(f"{path}: {exc}") from None


# ---------------------------------------------------------------- commands


def cmd_gen_grid(args) -> int:
    g = generate_grid(args.rows, args.cols, args.pop, args.seed)
    _write(args.out, save_graph(g))
    return 0


def _run_configs(args, parser):
    if args.mode == "plain" and args.beta is not None:
        parser.error("--beta is not used by --mode plain")
    if args.mode != "anneal" and args.beta_end is not None:
        parser.error("--beta-end needs --mode anneal")
    if args.mode != "anneal" and args.schedule is not None:
        parser.error("--schedule needs --mode anneal")
    gates = ConstraintGates(args.compact_min, args.pop_dev_max, args.hole_test)
    pre_gates = ConstraintGates(hole_test=args.hole_test)
    try:
        schedule = AnnealSchedule(
            args.beta if args.beta is not None else 0.0,
            args.beta_end if args.beta_end is not None else 5.0,
            args.schedule or "linear",
        )
    except ValueError as exc:
        parser.error(str(exc))
    pre = ChainConfig("prerun", args.prerun, gates=pre_gates, weights=args.weights,
                      trace_every=args.trace_every, seed=args.seed)
    main = ChainConfig(args.mode, args.steps, beta=args.beta or 0.0, schedule=schedule,
                       weights=args.weights, gates=gates, seed=args.seed,
                       trace_every=args.trace_every)
    return pre, main


def cmd_run(args, parser) -> int:
    pre, main = _run_configs(args, parser)
    graph = _load_graph(args.graph)
    if not 2 <= args.K <= graph.n_units:
        raise DataError(f"-K must lie in 2..{graph.n_units}")
    n = args.replicates
    configs = [ChainConfig(main.mode, main.steps, main.beta, main.schedule, main.weights,
                           main.gates, args.seed + i, main.trace_every) for i in range(n)]

    def one(cfg):
        return run(graph, args.K, pre, cfg)

    if n == 1:
        results = [one(configs[0])]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(one, configs))
    for i, (part, trace) in enumerate(results):
        if args.out:
            _write(_suffixed(args.out, i, n), save_partition(part))
        if args.trace:
            _write(_suffixed(args.trace, i, n), trace.to_csv())
        if args.svg:
            _write(_suffixed(args.svg, i, n), render_svg(graph, part, RenderSpec(cell_size=args.cell_size)))
        last = trace.row(len(trace) - 1)
        print(f"replicate {i}: seed={args.seed + i} steps={part.steps} accepted={part.accepted} "
              f"balanced={last.balanced:.6g} compact={last.compact:.6g} cut={last.cut_size}",
              file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    graph = _load_graph(args.graph)
    try:
        with open(args.partition, encoding="utf-8") as fh:
            part = load_partition(fh, graph)
        with open(args.votes, encoding="utf-8", newline="") as fh:
            votes = load_votes(fh, graph.n_units)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    result = evaluate_election(part, votes)
    sys.stdout.write(result.summary())
    if args.csv:
        _write(args.csv, result.to_csv())
    return 0


def cmd_enumerate(args) -> int:
    graph = _load_graph(args.graph)
    try:
        states = enumerate_partitions(graph, args.K, simply_connected=args.hole_test,
                                      size_equal=args.size_equal)
    except InstanceTooLarge as exc:
        raise DataError(str(exc)) from None
    except ValueError as exc:
        raise DataError(str(exc)) from None
    index = StateIndex(states)
    _write(args.out, index.dump())
    print(f"states: {len(index)}", file=sys.stderr)
    if not args.uniformity_check:
        return 0
    if not states:
        raise DataError("no valid states to check")
    cfg = ChainConfig("metropolis", 0, beta=0.0, gates=ConstraintGates(hole_test=args.hole_test),
                      seed=args.seed)
    rep = uniformity_check(graph, args.K, cfg, args.samples, args.burn_in, args.thin,
                           size_equal=args.size_equal, min_kept=args.min_kept)
    if args.hist:
        full = enumerate_partitions(graph, args.K, simply_connected=args.hole_test)
        counts = np.zeros(len(index), dtype=np.int64)
        for s, c in zip(full, rep.histogram):
            if s in index:
                counts[index.index(s)] = c
        _write(args.hist, "state_index,count\n" + "".join(f"{i},{int(c)}\n" for i, c in enumerate(counts)))
    print(f"tv_distance {rep.tv:.6f} (states {rep.n_target}, kept {rep.kept} of {rep.samples} samples)")
    return 0 if rep.tv < UNIFORMITY_TV_MAX else 3


def cmd_render(args) -> int:
    graph = _load_graph(args.graph)
    try:
        with open(args.partition, encoding="utf-8") as fh:
            part = load_partition(fh, graph)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from None
    _write(args.svg, render_svg(graph, part, RenderSpec(cell_size=args.cell_size)))
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flipchain", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-grid", help="write a grid graph file")
    g.add_argument("--rows", type=_pos_int, required=True)
    g.add_argument("--cols", type=_pos_int, required=True)
    g.add_argument("--pop", type=_pop_model, required=True, help="constant:<c> | normal:<mean>:<sd>")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="-")

    r = sub.add_parser("run", help="prerun then run a chain")
    r.add_argument("--graph", required=True)
    r.add_argument("-K", type=int, required=True)
    r.add_argument("--prerun", type=_nonneg_int, default=0)
    r.add_argument("--steps", type=_nonneg_int, default=0)
    r.add_argument("--mode", choices=("plain", "metropolis", "anneal"), default="plain")
    r.add_argument("--beta", type=float, default=None, help="metropolis beta, or anneal start")
    r.add_argument("--beta-end", type=float, default=None)
    r.add_argument("--schedule", choices=("linear", "geometric"), default=None)
    r.add_argument("--weights", type=_weights, default=ScoreWeights(), help="w_balance:w_compact")
    r.add_argument("--compact-min", type=_positive_float, default=None)
    r.add_argument("--pop-dev-max", type=_positive_float, default=None)
    r.add_argument("--hole-test", type=_on_off, default=True, metavar="on|off")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trace")
    r.add_argument("--trace-every", type=_pos_int, default=1)
    r.add_argument("--out")
    r.add_argument("--svg")
    r.add_argument("--cell-size", type=_pos_int, default=10)
    r.add_argument("--replicates", type=_pos_int, default=1)

    e = sub.add_parser("eval", help="seats and votes for a plan")
    e.add_argument("--graph", required=True)
    e.add_argument("--partition", required=True)
    e.add_argument("--votes", required=True)
    e.add_argument("--csv")

    n = sub.add_parser("enumerate", help="list every valid plan of a small graph")
    n.add_argument("--graph", required=True)
    n.add_argument("-K", type=_pos_int, required=True)
    n.add_argument("--size-equal", action="store_true")
    n.add_argument("--hole-test", type=_on_off, default=True, metavar="on|off")
    n.add_argument("--out", default="-")
    n.add_argument("--hist")
    n.add_argument("--uniformity-check", action="store_true")
    n.add_argument("--samples", type=_pos_int, default=100_000)
    n.add_argument("--burn-in", type=_nonneg_int, default=1000)
    n.add_argument("--thin", type=_pos_int, default=10)
    n.add_argument("--min-kept", type=_pos_int, default=None,
                   help="keep sampling until this many target-state visits")
    n.add_argument("--seed", type=int, default=0)

    v = sub.add_parser("render", help="draw a plan as SVG")
    v.add_argument("--graph", required=True)
    v.add_argument("--partition", required=True)
    v.add_argument("--svg", default="-")
    v.add_argument("--cell-size", type=_pos_int, default=10)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen-grid":
            return cmd_gen_grid(args)
        if args.command == "run":
            return cmd_run(args, parser)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "enumerate":
            return cmd_enumerate(args)
        if args.command == "render":
            return cmd_render(args)
    except DataError as exc:
        print(f"flipchain: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"flipchain: error: {exc}", file=sys.stderr)
        return 1
    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
