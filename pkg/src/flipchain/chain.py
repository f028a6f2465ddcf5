"""Markov chain driver: prerun growth, plain walk, Metropolis-Hastings, annealing."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, TextIO

import numpy as np

from . import _kernel
from .graph import DualGraph
from .partition import Partition, as_bitgen, initial_state
from .scoring import ScoreWeights

MODES = {"prerun": _kernel.PRERUN, "plain": _kernel.PLAIN,
         "metropolis": _kernel.METROPOLIS, "anneal": _kernel.ANNEAL}
SHAPES = {"linear": _kernel.LINEAR, "geometric": _kernel.GEOMETRIC}


@dataclass(frozen=True)
class ConstraintGates:
    """Optional plan constraints.

    ``compact_total_min`` bounds the total compact score from below and
    ``pop_dev_max`` bounds every district's relative population deviation.
    Inside a chain each gate stays dormant until the state first satisfies
    it, and is enforced from then on.
    """

    compact_total_min: Optional[float] = None
    pop_dev_max: Optional[float] = None
    hole_test: bool = True

    def __post_init__(self):
        for name in ("compact_total_min", "pop_dev_max"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class AnnealSchedule:
    beta_start: float = 0.0
    beta_end: float = 5.0
    shape: str = "linear"

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown schedule shape {self.shape!r}")
        if self.beta_start < 0 or self.beta_end < self.beta_start:
            raise ValueError("need 0 <= beta_start <= beta_end")
        if self.shape == "geometric" and not self.beta_start > 0:
            raise ValueError("geometric schedule needs beta_start > 0")

    def beta(self, t: int, steps: int) -> float:
        return _kernel.anneal_beta(self.beta_start, self.beta_end, SHAPES[self.shape], t, steps)


@dataclass(frozen=True)
class ChainConfig:
    mode: str = "plain"
    steps: int = 0
    beta: float = 0.0
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    weights: ScoreWeights = field(default_factory=ScoreWeights)
    gates: ConstraintGates = field(default_factory=ConstraintGates)
    seed: int = 0
    trace_every: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")


@dataclass(frozen=True)
class TraceRow:
    step: int
    accepted: bool
    balanced: float
    compact: float
    energy: float
    cut_size: int


TRACE_HEADER = "step,accepted,balanced,compact,energy,cut_size"


@dataclass
class Trace:
    """Column store of traced chain steps; row 0 is the starting state."""

    step: np.ndarray
    accepted: np.ndarray
    balanced: np.ndarray
    compact: np.ndarray
    energy: np.ndarray
    cut_size: np.ndarray
    prerun_steps: int = 0
    max_deviation: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def empty(cls) -> "Trace":
        z = np.zeros(0)
        return cls(z.astype(np.int64), z.astype(bool), z, z, z, z.astype(np.int64))

    def __len__(self):
        return len(self.step)

    def __iter__(self) -> Iterator[TraceRow]:
        for i in range(len(self)):
            yield self.row(i)

    def row(self, i: int) -> TraceRow:
        return TraceRow(int(self.step[i]), bool(self.accepted[i]), float(self.balanced[i]),
                        float(self.compact[i]), float(self.energy[i]), int(self.cut_size[i]))

    def extend(self, cols) -> None:
        """Append six CSV columns, plus an optional seventh of max deviations
        (NaN when absent, e.g. for traces read back from CSV)."""
        cols = list(cols)
        if len(cols) == 6:
            cols.append(np.full(len(cols[0]), np.nan))
        names = ("step", "accepted", "balanced", "compact", "energy", "cut_size", "max_deviation")
        for name, col in zip(names, cols):
            col = np.asarray(col)
            if name == "accepted":
                col = col.astype(bool)
            setattr(self, name, np.concatenate([getattr(self, name), col]))

    def main_phase(self) -> "Trace":
        """Rows belonging to the main (post-prerun) phase."""
        m = self.step > self.prerun_steps
        return Trace(self.step[m], self.accepted[m], self.balanced[m], self.compact[m],
                     self.energy[m], self.cut_size[m], self.prerun_steps, self.max_deviation[m])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(TRACE_HEADER + "\n")
        for i in range(len(self)):
            out.write(f"{int(self.step[i])},{int(bool(self.accepted[i]))},{self.balanced[i]:.9g},"
                      f"{self.compact[i]:.9g},{self.energy[i]:.9g},{int(self.cut_size[i])}\n")
        return out.getvalue()


def load_trace(stream: TextIO | str) -> Trace:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    header = stream.readline().strip()
    if header != TRACE_HEADER:
        raise ValueError(f"bad trace header {header!r}")
    rows = [line.split(",") for line in stream if line.strip()]
    t = Trace.empty()
    if rows:
        cols = list(zip(*rows))
        t.extend([np.array(cols[0], dtype=np.int64), np.array(cols[1], dtype=np.int64),
                  np.array(cols[2], dtype=float), np.array(cols[3], dtype=float),
                  np.array(cols[4], dtype=float), np.array(cols[5], dtype=np.int64)])
    return t


# ---------------------------------------------------------------- acceptance


def mh_acceptance(x_cut: int, y_cut: int, q_xy_num: int, q_yx_num: int,
                  E_x: float, E_y: float, beta: float) -> float:
    """Metropolis-Hastings acceptance for one flip from state x to state y.

    The flip proposal picks a cut edge uniformly and one endpoint with
    probability 1/2, so q(x->y) = q_xy_num / (2 x_cut) where q_xy_num counts
    the cut edges joining the flipped unit to its destination. Targets the
    density proportional to exp(-beta E); beta = 0 is uniform.
    """
    w = 1.0
    if beta != 0.0:
        arg = -beta * (E_y - E_x)
        if arg > 700.0:
            return 1.0
        w = math.exp(arg)
    ratio = w * float(q_yx_num * x_cut) / float(q_xy_num * y_cut)
    return 1.0 if ratio >= 1.0 else ratio


# ---------------------------------------------------------------- single steps


def _row(partition: Partition, accepted: bool, weights: ScoreWeights) -> TraceRow:
    b, c, e = partition._kernel.scores(weights.w_balance, weights.w_compact)
    return TraceRow(partition.steps, bool(accepted), b, c, e, partition.cut_size)


def _step(partition, mode, beta, weights, gates, rng):
    if partition.k < 2:
        raise ValueError("chain steps need K >= 2")
    partition._ensure_gates(gates)
    ok = partition._kernel.step(as_bitgen(rng), MODES[mode], float(beta),
                                weights.w_balance, weights.w_compact)
    return partition, _row(partition, ok, weights)


def step_prerun(graph: DualGraph, partition: Partition, gates: Optional[ConstraintGates], rng,
                weights: ScoreWeights = ScoreWeights()):
    """Growth step: a valid flip is taken only from a district with more units
    than the destination."""
    return _step(partition, "prerun", 0.0, weights, gates, rng)


def step_plain(graph: DualGraph, partition: Partition, gates: Optional[ConstraintGates], rng,
               weights: ScoreWeights = ScoreWeights()):
    return _step(partition, "plain", 0.0, weights, gates, rng)


def step_metropolis(graph: DualGraph, partition: Partition, beta: float, weights: ScoreWeights,
                    gates: Optional[ConstraintGates], rng):
    return _step(partition, "metropolis", beta, weights, gates, rng)


def step_anneal(graph: DualGraph, partition: Partition, t: int, steps: int, schedule: AnnealSchedule,
                weights: ScoreWeights, gates: Optional[ConstraintGates], rng):
    if not 0 <= t < steps:
        raise ValueError("need 0 <= t < steps")
    return _step(partition, "anneal", schedule.beta(t, steps), weights, gates, rng)


# ---------------------------------------------------------------- runs


def _n_rows(base: int, n: int, every: int, final: int) -> int:
    hi = base + n
    rows = hi // every - base // every
    if base < final <= hi and final % every != 0:
        rows += 1
    return rows


def advance(partition: Partition, config: ChainConfig, rng, *, trace_weights: Optional[ScoreWeights] = None,
            final_step: Optional[int] = None, t0: int = 0, n: Optional[int] = None,
            reset_gates: bool = True) -> Trace:
    """Run ``config.steps`` steps of ``config.mode`` on ``partition`` in place.

    Traced rows are the global steps divisible by ``config.trace_every`` plus
    ``final_step`` (default: the last step of this call). Passing ``t0``/``n``
    runs the slice ``[t0, t0 + n)`` of the schedule, so a phase can be split
    into chunks with identical results.
    """
    if partition.k < 2:
        raise ValueError("chain runs need K >= 2")
    n = config.steps - t0 if n is None else n
    weights = trace_weights or config.weights
    if reset_gates:
        partition._gates_key = None
    partition._ensure_gates(config.gates)
    base = partition.steps
    final = base + n if final_step is None else final_step
    rows = _n_rows(base, n, config.trace_every, final)
    if config.mode == "anneal":
        b0, b1 = config.schedule.beta_start, config.schedule.beta_end
    else:
        b0 = b1 = config.beta
    cols = partition._kernel.advance(
        as_bitgen(rng), MODES[config.mode], n, float(b0), float(b1), SHAPES[config.schedule.shape],
        t0, config.steps, weights.w_balance, weights.w_compact, config.trace_every, final, rows,
    )
    t = Trace.empty()
    t.extend(cols)
    return t


def run(graph: DualGraph, k: int, prerun_config: Optional[ChainConfig], run_config: ChainConfig,
        *, partition: Optional[Partition] = None, backend: Optional[str] = None):
    """Prerun then main phase from the standard initial state.

    A single generator seeded with ``run_config.seed`` drives the initial
    seed draw and both phases. Gates of each phase latch independently.
    Returns the final partition and a trace whose first row is step 0.
    """
    if prerun_config is not None and prerun_config.mode != "prerun":
        raise ValueError("prerun_config must use mode 'prerun'")
    rng = np.random.default_rng(run_config.seed)
    if partition is None:
        partition = initial_state(graph, k, rng, backend=backend)
    else:
        partition = partition.copy()
    if partition.k < 2:
        raise ValueError("chain runs need K >= 2")
    weights = run_config.weights
    pre_n = prerun_config.steps if prerun_config is not None else 0
    final = partition.steps + pre_n + run_config.steps
    trace = Trace.empty()
    b, c, e = partition._kernel.scores(weights.w_balance, weights.w_compact)
    trace.extend([[partition.steps], [False], [b], [c], [e], [partition.cut_size],
                  [partition._kernel.max_deviation()]])
    if pre_n:
        trace.extend(_cols(advance(partition, prerun_config, rng, trace_weights=weights, final_step=final)))
    trace.prerun_steps = partition.steps
    if run_config.steps:
        trace.extend(_cols(advance(partition, run_config, rng, final_step=final)))
    return partition, trace


def _cols(t: Trace):
    return t.step, t.accepted, t.balanced, t.compact, t.energy, t.cut_size, t.max_deviation
