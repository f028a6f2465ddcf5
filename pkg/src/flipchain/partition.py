"""K-district plans over a dual graph, with incrementally maintained statistics."""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

import numpy as np

from . import _kernel
from .graph import DualGraph, Edge

_NAN = float("nan")


@dataclass(frozen=True)
class DistrictStats:
    population: int
    area: float
    circumference: float
    unit_count: int


@dataclass(frozen=True)
class FlipProposal:
    unit: int
    source: int
    target: int
    via_edge: Edge


def as_bitgen(rng):
    """Accept a numpy ``Generator`` or ``BitGenerator``; return the bit generator."""
    if isinstance(rng, np.random.Generator):
        return rng.bit_generator
    if isinstance(rng, np.random.BitGenerator):
        return rng
    raise TypeError(f"expected a numpy Generator or BitGenerator, got {type(rng).__name__}")


class Partition:
    """Assignment of every unit to one of ``k`` districts.

    Every district must be nonempty and connected. The per-district
    statistics, cut-edge set and district contact counts live in a flip
    kernel and are updated in place by :func:`apply_flip` and the chain
    steps; use :meth:`copy` for snapshots.
    """

    def __init__(self, graph: DualGraph, assignment: Iterable[int], k: Optional[int] = None,
                 *, backend: Optional[str] = None):
        assignment = np.asarray(list(assignment) if not isinstance(assignment, np.ndarray)
                                else assignment, dtype=np.int64)
        if assignment.shape != (graph.n_units,):
            raise ValueError(f"assignment has {assignment.size} entries, graph has {graph.n_units} units")
        if k is None:
            k = int(assignment.max()) + 1
        if assignment.min() < 0 or assignment.max() >= k:
            raise ValueError(f"district ids must lie in 0..{k - 1}")
        counts = np.bincount(assignment, minlength=k)
        if (counts == 0).any():
            raise ValueError(f"district {int(np.argmin(counts))} is empty")
        for d in range(k):
            if not _induced_connected(graph, assignment, d):
                raise ValueError(f"district {d} is not connected")
        self.graph = graph
        self.k = int(k)
        self._kernel = _kernel.get_backend(backend).FlipKernel(graph.arrays, assignment, k)
        self._gates_key = None

    @classmethod
    def _wrap(cls, graph, k, kern):
        p = cls.__new__(cls)
        p.graph = graph
        p.k = k
        p._kernel = kern
        p._gates_key = None
        return p

    @property
    def backend(self) -> str:
        return "cython" if not isinstance(self._kernel, _kernel._pykernel.FlipKernel) else "python"

    @property
    def assignment(self) -> np.ndarray:
        a = self._kernel.get_assignment()
        a.flags.writeable = False
        return a

    @property
    def stats(self) -> list[DistrictStats]:
        pop, area, circ, count, _ = self._kernel.get_district_arrays()
        return [DistrictStats(int(pop[j]), float(area[j]), float(circ[j]), int(count[j]))
                for j in range(self.k)]

    @property
    def populations(self) -> np.ndarray:
        return self._kernel.get_district_arrays()[0]

    @property
    def cut_edges(self) -> frozenset[tuple[int, int]]:
        edges = self.graph.edges
        return frozenset((edges[e].a, edges[e].b) for e in self._kernel.get_cut_edges())

    @property
    def cut_size(self) -> int:
        return int(self._kernel.n_cut)

    @property
    def steps(self) -> int:
        """Chain steps taken on this partition (rejections included)."""
        return int(self._kernel.get_counters()[0])

    @property
    def accepted(self) -> int:
        return int(self._kernel.get_counters()[1])

    @property
    def latches(self) -> tuple[bool, bool]:
        """Whether the compact and population gates have activated."""
        return self._kernel.get_latches()

    def members(self, district: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == district)

    def copy(self) -> "Partition":
        p = Partition._wrap(self.graph, self.k, self._kernel.copy())
        p._gates_key = self._gates_key
        return p

    def key(self) -> bytes:
        return self.assignment.tobytes()

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return (self.graph == other.graph and self.k == other.k
                and np.array_equal(self.assignment, other.assignment)
                and self.cut_edges == other.cut_edges)

    def __hash__(self):
        return hash((self.k, self.key()))

    def __repr__(self):
        return f"Partition(k={self.k}, units={self.graph.n_units}, cut={self.cut_size})"

    def _ensure_gates(self, gates) -> None:
        """Push a gate configuration into the kernel; latches reset on change."""
        if gates is None:
            key = (None, None, True)
        else:
            key = (gates.compact_total_min, gates.pop_dev_max, bool(gates.hole_test))
        if key != self._gates_key:
            self._kernel.set_gates(
                _NAN if key[0] is None else float(key[0]),
                _NAN if key[1] is None else float(key[1]),
                key[2],
            )
            self._gates_key = key


# ---------------------------------------------------------------- from-scratch checks


def _induced_connected(graph: DualGraph, assignment, district: int) -> bool:
    members = [u for u in range(graph.n_units) if assignment[u] == district]
    if not members:
        return True
    adj = graph.adjacency
    seen = {members[0]}
    queue = deque([members[0]])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen and assignment[y] == district:
                seen.add(y)
                queue.append(y)
    return len(seen) == len(members)


def district_holes(graph: DualGraph, assignment, district: int) -> int:
    """Components of (complement of district + OUTSIDE) minus one, by unit-level BFS."""
    assignment = np.asarray(assignment)
    adj = graph.adjacency
    outside = graph.n_units
    comp = [u for u in range(graph.n_units) if assignment[u] != district]
    seen = set()
    n_comp = 0
    outer = graph.outer_units
    for start in [outside] + comp:
        if start in seen:
            continue
        n_comp += 1
        seen.add(start)
        queue = deque([start])
        while queue:
            x = queue.popleft()
            if x == outside:
                nbrs = [u for u in comp if u in outer]
            else:
                nbrs = [y for y in adj[x] if assignment[y] != district]
                if x in outer:
                    nbrs.append(outside)
            for y in nbrs:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    return n_comp - 1


def is_simply_connected(graph: DualGraph, assignment, district: int) -> bool:
    return _induced_connected(graph, assignment, district) and district_holes(graph, assignment, district) == 0


def recompute_stats(graph: DualGraph, assignment, k: Optional[int] = None) -> list[DistrictStats]:
    """District statistics by full scan; ground truth for the incremental kernel."""
    assignment = np.asarray(assignment)
    if k is None:
        k = int(assignment.max()) + 1
    ar = graph.arrays
    pop = np.zeros(k, dtype=np.int64)
    np.add.at(pop, assignment, ar.pop)
    count = np.bincount(assignment, minlength=k)
    area = np.bincount(assignment, weights=ar.area, minlength=k)
    perim = np.bincount(assignment, weights=ar.perim, minlength=k)
    da, db = assignment[ar.edge_a], assignment[ar.edge_b]
    same = da == db
    internal = np.bincount(da[same], weights=ar.edge_shared[same], minlength=k)
    return [DistrictStats(int(pop[j]), float(area[j]), float(perim[j] - 2.0 * internal[j]), int(count[j]))
            for j in range(k)]


def recompute_cut_edges(graph: DualGraph, assignment) -> frozenset[tuple[int, int]]:
    return frozenset((e.a, e.b) for e in graph.edges if assignment[e.a] != assignment[e.b])


# ---------------------------------------------------------------- operations


def initial_state(graph: DualGraph, k: int, seed=0, *, max_tries: int = 1000,
                  backend: Optional[str] = None) -> Partition:
    """K-1 singleton districts at random units; district K-1 takes the rest.

    Seeds are redrawn until the remaining units form a connected district.
    ``seed`` may be an integer or a numpy ``Generator`` (which is advanced).
    """
    m = graph.n_units
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= K <= M (K={k}, M={m})")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(max_tries):
        seeds = rng.choice(m, size=k - 1, replace=False) if k > 1 else np.empty(0, dtype=np.int64)
        assignment = np.full(m, k - 1, dtype=np.int64)
        assignment[seeds] = np.arange(k - 1)
        if _induced_connected(graph, assignment, k - 1):
            return Partition(graph, assignment, k, backend=backend)
    raise RuntimeError(f"no connected complement after {max_tries} seed draws")


def propose_flip(partition: Partition, rng) -> FlipProposal:
    """Uniform cut edge, then one endpoint with probability 1/2."""
    if partition.k < 2:
        raise ValueError("no district boundary exists when K = 1")
    prop = partition._kernel.propose(as_bitgen(rng))
    if prop is None:
        raise ValueError("partition has no cut edges")
    u, v, e = prop
    a = partition._kernel.get_assignment()
    return FlipProposal(int(u), int(a[u]), int(a[v]), partition.graph.edges[e])


def is_valid_flip(graph: DualGraph, partition: Partition, proposal: FlipProposal, gates=None) -> bool:
    """Whether the flip keeps every district nonempty, connected and hole-free
    (no new hole), and passes every gate set in ``gates``.

    Gates are applied directly here; the chain's activation latch is not
    consulted.
    """
    if graph is not partition.graph and graph != partition.graph:
        raise ValueError("proposal evaluated against a different graph")
    u = proposal.unit
    if partition.assignment[u] != proposal.source:
        return False
    e = proposal.via_edge
    if u not in (e.a, e.b) or partition.assignment[e.other(u)] != proposal.target:
        return False
    partition._ensure_gates(gates)
    use_c = gates is not None and gates.compact_total_min is not None
    use_p = gates is not None and gates.pop_dev_max is not None
    return bool(partition._kernel.check(u, proposal.target, use_c, use_p))


def apply_flip(partition: Partition, proposal: FlipProposal) -> Partition:
    """Move ``proposal.unit`` into ``proposal.target`` in place; returns ``partition``."""
    if partition.assignment[proposal.unit] != proposal.source:
        raise ValueError("proposal is stale: unit is no longer in its source district")
    if proposal.source == proposal.target:
        raise ValueError("source and target districts coincide")
    partition._kernel.apply(proposal.unit, proposal.target)
    return partition


# ---------------------------------------------------------------- partition file


def save_partition(partition: Partition) -> str:
    return "".join(f"{u} {d}\n" for u, d in enumerate(partition.assignment))


def load_partition(stream: TextIO | str, graph: DualGraph, k: Optional[int] = None,
                   *, backend: Optional[str] = None) -> Partition:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    assignment = np.full(graph.n_units, -1, dtype=np.int64)
    for lineno, raw in enumerate(stream, start=1):
        toks = raw.split("#")[0].split()
        if not toks:
            continue
        if len(toks) != 2:
            raise ValueError(f"line {lineno}: expected '<unit_id> <district_id>'")
        u, d = int(toks[0]), int(toks[1])
        if not 0 <= u < graph.n_units:
            raise ValueError(f"line {lineno}: unknown unit {u}")
        if assignment[u] >= 0:
            raise ValueError(f"line {lineno}: unit {u} assigned twice")
        assignment[u] = d
    if (assignment < 0).any():
        raise ValueError(f"unit {int(np.argmin(assignment))} is unassigned")
    return Partition(graph, assignment, k, backend=backend)
