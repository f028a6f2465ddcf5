"""Brute-force state spaces for small graphs and chain-vs-oracle diagnostics.

Everything here is deliberately independent of the flip kernel: validity is
re-derived with plain BFS over unit sets.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .graph import DualGraph

MAX_UNITS = 24
MAX_STATES = 10**7


class InstanceTooLarge(ValueError):
    pass


class StateOutsideSpace(RuntimeError):
    """The chain reached a state the oracle did not enumerate."""


def canonical(assignment: Sequence[int]) -> tuple[int, ...]:
    """Relabel districts in order of their smallest unit id."""
    relabel: dict[int, int] = {}
    out = []
    for d in assignment:
        d = int(d)
        if d not in relabel:
            relabel[d] = len(relabel)
        out.append(relabel[d])
    return tuple(out)


@dataclass(frozen=True)
class Constraints:
    simply_connected: bool = False
    size_equal: bool = False
    pop_dev_max: Optional[float] = None


# ---------------------------------------------------------------- validity


def _connected(adj, members: set[int]) -> bool:
    if not members:
        return False
    start = next(iter(members))
    seen = {start}
    q = deque([start])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y in members and y not in seen:
                seen.add(y)
                q.append(y)
    return len(seen) == len(members)


def _hole_free(graph: DualGraph, members: set[int]) -> bool:
    adj = graph.adjacency
    rest = set(range(graph.n_units)) - members
    seen = {u for u in rest if u in graph.outer_units}
    q = deque(seen)
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y in rest and y not in seen:
                seen.add(y)
                q.append(y)
    return seen == rest


def satisfies(graph: DualGraph, assignment: Sequence[int], k: int, c: Constraints) -> bool:
    blocks = [set() for _ in range(k)]
    for u, d in enumerate(assignment):
        if not 0 <= d < k:
            return False
        blocks[d].add(u)
    adj = graph.adjacency
    if any(not _connected(adj, b) for b in blocks):
        return False
    if c.size_equal and len({len(b) for b in blocks}) != 1:
        return False
    if c.pop_dev_max is not None:
        pops = [sum(graph.units[u].population for u in b) for b in blocks]
        mean = sum(pops) / k
        if any(abs(p - mean) / mean > c.pop_dev_max for p in pops):
            return False
    if c.simply_connected and not all(_hole_free(graph, b) for b in blocks):
        return False
    return True


def _guard(graph: DualGraph, k: int):
    m = graph.n_units
    if m > MAX_UNITS:
        raise InstanceTooLarge(f"enumeration refused: {m} units exceeds the limit of {MAX_UNITS}")
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= K <= M (K={k}, M={m})")


# ---------------------------------------------------------------- enumerators


def enumerate_partitions(graph: DualGraph, k: int, *, simply_connected: bool = False,
                         size_equal: bool = False, pop_dev_max: Optional[float] = None) -> list[tuple[int, ...]]:
    """All canonical K-partitions with connected districts satisfying the flags.

    Depth-first over units in id order with restricted-growth labels. A
    branch is cut when too few units remain to open the missing districts,
    when a size-equal block overflows, or when a block that can no longer
    grow (no unassigned neighbour) is disconnected.
    """
    _guard(graph, k)
    c = Constraints(simply_connected, size_equal, pop_dev_max)
    m = graph.n_units
    adj = graph.adjacency
    if size_equal and m % k:
        return []
    cap = m // k if size_equal else m
    label = [-1] * m
    blocks: list[set[int]] = []
    out: list[tuple[int, ...]] = []

    def closed_ok(i: int) -> bool:
        # units > i are unassigned
        for b in blocks:
            if any(y > i for x in b for y in adj[x]):
                continue
            if not _connected(adj, b):
                return False
        return True

    def rec(i: int):
        if i == m:
            if len(blocks) == k and satisfies(graph, label, k, c):
                out.append(tuple(label))
                if len(out) > MAX_STATES:
                    raise InstanceTooLarge(f"enumeration refused: more than {MAX_STATES} states")
            return
        remaining = m - i
        for d in range(min(len(blocks) + 1, k)):
            opened = d == len(blocks)
            if k - len(blocks) - (1 if opened else 0) > remaining - 1:
                continue
            if opened:
                blocks.append(set())
            elif len(blocks[d]) >= cap:
                continue
            blocks[d].add(i)
            label[i] = d
            if closed_ok(i):
                rec(i + 1)
            blocks[d].discard(i)
            label[i] = -1
            if opened:
                blocks.pop()

    rec(0)
    return out


def enumerate_partitions_bruteforce(graph: DualGraph, k: int, *, simply_connected: bool = False,
                                    size_equal: bool = False,
                                    pop_dev_max: Optional[float] = None) -> list[tuple[int, ...]]:
    """Filter every restricted-growth string; cross-check for tiny graphs."""
    _guard(graph, k)
    m = graph.n_units
    if k ** (m - 1) > MAX_STATES:
        raise InstanceTooLarge("brute-force enumeration refused: too many labelings")
    c = Constraints(simply_connected, size_equal, pop_dev_max)
    out = []
    for tail in itertools.product(range(k), repeat=m - 1):
        lab = (0,) + tail
        if canonical(lab) != lab or max(lab) != k - 1:
            continue
        if satisfies(graph, lab, k, c):
            out.append(lab)
    return out


class StateIndex:
    """Dense index over canonical partitions."""

    def __init__(self, states: Sequence[tuple[int, ...]]):
        self.states = list(states)
        self._index = {s: i for i, s in enumerate(self.states)}
        if len(self._index) != len(self.states):
            raise ValueError("duplicate states")

    def __len__(self):
        return len(self.states)

    def __contains__(self, assignment):
        return canonical(assignment) in self._index

    def index(self, assignment: Sequence[int]) -> int:
        key = canonical(assignment)
        try:
            return self._index[key]
        except KeyError:
            raise StateOutsideSpace(f"state {key} is not in the enumerated space") from None

    def mask(self, predicate: Callable[[tuple[int, ...]], bool]) -> np.ndarray:
        return np.array([bool(predicate(s)) for s in self.states], dtype=bool)

    def dump(self) -> str:
        # Districts may exceed 9, so labels are space separated.
        return "".join(" ".join(map(str, s)) + "\n" for s in self.states)


# ---------------------------------------------------------------- diagnostics


def tv_distance(empirical, target) -> float:
    """(1/2) sum |p - q| after normalizing both histograms."""
    p = np.asarray(empirical, dtype=float)
    q = np.asarray(target, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"mismatched supports: {p.shape} vs {q.shape}")
    if p.sum() <= 0 or q.sum() <= 0:
        raise ValueError("histograms must have positive mass")
    return float(0.5 * np.abs(p / p.sum() - q / q.sum()).sum())


def _chain_samples(partition, config, samples: int, burn_in: int, thin: int, rng):
    from .chain import MODES
    from .partition import as_bitgen

    if config.mode not in ("metropolis", "plain", "anneal"):
        raise ValueError("sampling needs a stationary chain mode")
    bitgen = as_bitgen(rng)
    partition._gates_key = None
    partition._ensure_gates(config.gates)
    mode = MODES["metropolis" if config.mode == "anneal" else config.mode]
    w = config.weights
    kern = partition._kernel
    if burn_in:
        kern.sample(bitgen, mode, float(config.beta), w.w_balance, w.w_compact, 1, burn_in)
    chunk = 50_000
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        yield kern.sample(bitgen, mode, float(config.beta), w.w_balance, w.w_compact, n, thin)
        done += n


def _index_rows(rows: np.ndarray, index: StateIndex) -> np.ndarray:
    m = rows.shape[1]
    base = int(rows.max()) + 1 if rows.size else 1
    if base ** m < 2**62:
        keys = rows @ (base ** np.arange(m, dtype=np.int64))
        uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        uniq_rows = rows[first]
    else:
        uniq_rows, inverse = np.unique(rows, axis=0, return_inverse=True)
    lookup = np.array([index.index(r) for r in uniq_rows], dtype=np.int64)
    return lookup[inverse.reshape(-1)]


def empirical_distribution(graph: DualGraph, k: int, chain_config, samples: int, burn_in: int,
                           thin: int, *, index: Optional[StateIndex] = None, partition=None,
                           rng=None) -> np.ndarray:
    """Visit counts over ``index`` from one chain: burn in, then keep every
    ``thin``-th state until ``samples`` states are recorded.

    Raises :class:`StateOutsideSpace` if the chain visits a state the index
    lacks. The chain starts from ``partition`` (copied) or the standard
    initial state, and is seeded from ``chain_config.seed`` unless ``rng``
    is given.
    """
    from .partition import initial_state

    if thin < 1 or samples < 0 or burn_in < 0:
        raise ValueError("need thin >= 1, samples >= 0, burn_in >= 0")
    if index is None:
        index = StateIndex(enumerate_partitions(graph, k, simply_connected=chain_config.gates.hole_test))
    if rng is None:
        rng = np.random.default_rng(chain_config.seed)
    p = partition.copy() if partition is not None else initial_state(graph, k, rng)
    hist = np.zeros(len(index), dtype=np.int64)
    for rows in _chain_samples(p, chain_config, samples, burn_in, thin, rng):
        hist += np.bincount(_index_rows(rows, index), minlength=len(index))
    return hist


def transition_counts(graph: DualGraph, k: int, chain_config, steps: int, burn_in: int,
                      index: StateIndex, *, rng=None) -> np.ndarray:
    """Counts of observed one-step transitions ``(x, y)`` between indexed states."""
    from .partition import initial_state

    if rng is None:
        rng = np.random.default_rng(chain_config.seed)
    p = initial_state(graph, k, rng)
    n = len(index)
    counts = np.zeros((n, n), dtype=np.int64)
    prev = None
    for rows in _chain_samples(p, chain_config, steps + 1, burn_in, 1, rng):
        idx = _index_rows(rows, index)
        if prev is not None:
            idx = np.concatenate([[prev], idx])
        np.add.at(counts, (idx[:-1], idx[1:]), 1)
        prev = idx[-1]
    return counts


@dataclass(frozen=True)
class UniformityReport:
    n_states: int
    n_target: int
    samples: int
    kept: int
    tv: float
    histogram: np.ndarray


def uniformity_check(graph: DualGraph, k: int, chain_config, samples: int, burn_in: int, thin: int,
                     *, size_equal: bool = False, pop_dev_max: Optional[float] = None,
                     min_kept: Optional[int] = None, rng=None) -> UniformityReport:
    """TV distance between the chain's visits and the uniform law on a target set.

    The chain moves on all connected (optionally hole-free) plans; the target
    set is the subset meeting ``size_equal``/``pop_dev_max``. Since the uniform
    law restricted to a subset is uniform on it, visits outside the target are
    simply dropped. With ``min_kept`` the chain keeps sampling in rounds of
    ``samples`` until that many target visits are recorded.
    """
    full = StateIndex(enumerate_partitions(graph, k, simply_connected=chain_config.gates.hole_test))
    c = Constraints(False, size_equal, pop_dev_max)
    mask = full.mask(lambda s: satisfies(graph, s, k, c))
    if not mask.any():
        raise ValueError("target set is empty")
    if rng is None:
        rng = np.random.default_rng(chain_config.seed)
    if k == 1:
        hist = np.zeros(len(full), dtype=np.int64)
        hist[0] = samples
        total = samples
    else:
        from .partition import initial_state

        p = initial_state(graph, k, rng)
        hist = np.zeros(len(full), dtype=np.int64)
        total = 0
        first = True
        while first or (min_kept is not None and hist[mask].sum() < min_kept):
            for rows in _chain_samples(p, chain_config, samples, burn_in if first else 0, thin, rng):
                hist += np.bincount(_index_rows(rows, full), minlength=len(full))
            total += samples
            first = False
    target = hist[mask]
    tv = tv_distance(target, np.ones(mask.sum())) if target.sum() else 1.0
    return UniformityReport(len(full), int(mask.sum()), total, int(target.sum()), tv, hist)
