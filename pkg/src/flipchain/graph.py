"""Dual graph of population units: data model, text format, grid generator."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, TextIO

import numpy as np


class GraphFormatError(ValueError):
    """Raised when a graph file cannot be parsed or fails validation."""

    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Unit:
    id: int
    population: int
    area: float
    perimeter: float


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    shared_boundary: float

    def other(self, unit: int) -> int:
        return self.b if unit == self.a else self.a


@dataclass(frozen=True)
class GraphArrays:
    """Flat CSR view of a graph consumed by the flip kernels."""

    nbr_ptr: np.ndarray
    nbr: np.ndarray
    nbr_edge: np.ndarray
    nbr_shared: np.ndarray
    edge_a: np.ndarray
    edge_b: np.ndarray
    edge_shared: np.ndarray
    pop: np.ndarray
    area: np.ndarray
    perim: np.ndarray
    outer: np.ndarray


@dataclass(frozen=True)
class DualGraph:
    """Immutable attributed adjacency structure over units ``0..M-1``.

    ``edges`` are canonical (``a < b``, sorted). ``outer`` holds the units
    touching the region's outer boundary; an empty set in the file means
    every unit is treated as outer. ``grid_shape`` is ``(rows, cols)`` for
    row-major grid instances and ``None`` otherwise.
    """

    units: tuple[Unit, ...]
    edges: tuple[Edge, ...]
    outer: frozenset[int] = field(default_factory=frozenset)
    grid_shape: Optional[tuple[int, int]] = None

    def __post_init__(self):
        _validate(self)

    @property
    def n_units(self) -> int:
        return len(self.units)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in self.units]
        for e in self.edges:
            nbrs[e.a].append(e.b)
            nbrs[e.b].append(e.a)
        return tuple(tuple(sorted(n)) for n in nbrs)

    @cached_property
    def outer_units(self) -> frozenset[int]:
        """Units adjacent to the virtual OUTSIDE node."""
        return self.outer if self.outer else frozenset(range(self.n_units))

    @cached_property
    def total_population(self) -> int:
        return sum(u.population for u in self.units)

    @cached_property
    def arrays(self) -> GraphArrays:
        m = self.n_units
        incident: list[list[tuple[int, int, float]]] = [[] for _ in range(m)]
        for eid, e in enumerate(self.edges):
            incident[e.a].append((e.b, eid, e.shared_boundary))
            incident[e.b].append((e.a, eid, e.shared_boundary))
        ptr = np.zeros(m + 1, dtype=np.int64)
        flat: list[tuple[int, int, float]] = []
        for u in range(m):
            incident[u].sort()
            flat.extend(incident[u])
            ptr[u + 1] = len(flat)
        outer = np.zeros(m, dtype=np.int64)
        outer[sorted(self.outer_units)] = 1
        return GraphArrays(
            nbr_ptr=ptr,
            nbr=np.array([t[0] for t in flat], dtype=np.int64),
            nbr_edge=np.array([t[1] for t in flat], dtype=np.int64),
            nbr_shared=np.array([t[2] for t in flat], dtype=np.float64),
            edge_a=np.array([e.a for e in self.edges], dtype=np.int64),
            edge_b=np.array([e.b for e in self.edges], dtype=np.int64),
            edge_shared=np.array([e.shared_boundary for e in self.edges], dtype=np.float64),
            pop=np.array([u.population for u in self.units], dtype=np.int64),
            area=np.array([u.area for u in self.units], dtype=np.float64),
            perim=np.array([u.perimeter for u in self.units], dtype=np.float64),
            outer=outer,
        )

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(e.a, e.b): i for i, e in enumerate(self.edges)}

    def edge_between(self, a: int, b: int) -> Edge:
        key = (a, b) if a < b else (b, a)
        return self.edges[self.edge_index[key]]


def _validate(g: DualGraph) -> None:
    m = len(g.units)
    if m == 0:
        raise GraphFormatError("graph has no units")
    for i, u in enumerate(g.units):
        if u.id != i:
            raise GraphFormatError(f"unit ids must be dense 0..{m - 1}; found {u.id} at {i}")
        if u.population < 0:
            raise GraphFormatError(f"unit {i}: negative population")
        if not (u.area > 0 and math.isfinite(u.area)):
            raise GraphFormatError(f"unit {i}: area must be positive")
        if not (u.perimeter > 0 and math.isfinite(u.perimeter)):
            raise GraphFormatError(f"unit {i}: perimeter must be positive")
    seen = set()
    prev = (-1, -1)
    for e in g.edges:
        if not (0 <= e.a < m and 0 <= e.b < m):
            raise GraphFormatError(f"edge {e.a} {e.b}: unknown unit id")
        if e.a >= e.b:
            raise GraphFormatError(f"edge {e.a} {e.b}: not canonical (need a < b)")
        if (e.a, e.b) in seen:
            raise GraphFormatError(f"edge {e.a} {e.b}: duplicate")
        if (e.a, e.b) < prev:
            raise GraphFormatError("edges are not sorted")
        prev = (e.a, e.b)
        seen.add((e.a, e.b))
        if not e.shared_boundary > 0:
            raise GraphFormatError(f"edge {e.a} {e.b}: shared boundary must be positive")
        limit = min(g.units[e.a].perimeter, g.units[e.b].perimeter)
        if e.shared_boundary > limit:
            raise GraphFormatError(f"edge {e.a} {e.b}: shared boundary exceeds a unit perimeter")
    for u in g.outer:
        if not 0 <= u < m:
            raise GraphFormatError(f"outer {u}: unknown unit id")
    if g.grid_shape is not None:
        r, c = g.grid_shape
        if r * c != m:
            raise GraphFormatError(f"grid {r}x{c} does not match {m} units")
    if not _connected(m, g.edges):
        raise GraphFormatError("graph is disconnected")


def _connected(m: int, edges: Iterable[Edge]) -> bool:
    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = m
    for e in edges:
        ra, rb = find(e.a), find(e.b)
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    return comps == 1


def make_graph(units, edges, outer=(), grid_shape=None) -> DualGraph:
    """Build a graph from loose input, canonicalizing edge orientation and order."""
    canon = []
    for e in edges:
        a, b, s = (e.a, e.b, e.shared_boundary) if isinstance(e, Edge) else e
        if a == b:
            raise GraphFormatError(f"edge {a} {b}: self-loop")
        if a > b:
            a, b = b, a
        canon.append(Edge(int(a), int(b), float(s)))
    canon.sort(key=lambda e: (e.a, e.b))
    return DualGraph(tuple(units), tuple(canon), frozenset(int(u) for u in outer), grid_shape)


# ---------------------------------------------------------------- populations


@dataclass(frozen=True)
class PopModel:
    kind: str  # "constant" | "normal"
    mean: float
    sd: float = 0.0

    @classmethod
    def constant(cls, c: int) -> "PopModel":
        return cls("constant", float(c))

    @classmethod
    def normal(cls, mean: float, sd: float) -> "PopModel":
        return cls("normal", float(mean), float(sd))

    @classmethod
    def parse(cls, text: str) -> "PopModel":
        """Parse ``constant:<c>`` or ``normal:<mean>:<sd>``."""
        parts = text.split(":")
        try:
            if parts[0] == "constant" and len(parts) == 2:
                c = int(parts[1])
                if c < 0:
                    raise ValueError
                return cls.constant(c)
            if parts[0] == "normal" and len(parts) == 3:
                mean, sd = float(parts[1]), float(parts[2])
                if sd < 0:
                    raise ValueError
                return cls.normal(mean, sd)
        except ValueError:
            pass
        raise ValueError(f"bad population model {text!r}; expected constant:<c> or normal:<mean>:<sd>")

    def draw(self, n: int, seed: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(n, int(self.mean), dtype=np.int64)
        rng = np.random.default_rng(seed)
        x = np.rint(rng.normal(self.mean, self.sd, size=n))
        return np.maximum(x, 1).astype(np.int64)


def generate_grid(rows: int, cols: int, pop_model: PopModel, seed: int = 0) -> DualGraph:
    """Row-major ``rows x cols`` grid of unit squares with rook adjacency."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    m = rows * cols
    pops = pop_model.draw(m, seed)
    units = tuple(Unit(i, int(pops[i]), 1.0, 4.0) for i in range(m))
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append(Edge(u, u + 1, 1.0))
            if r + 1 < rows:
                edges.append(Edge(u, u + cols, 1.0))
    edges.sort(key=lambda e: (e.a, e.b))
    outer = frozenset(
        r * cols + c
        for r in range(rows)
        for c in range(cols)
        if r in (0, rows - 1) or c in (0, cols - 1)
    )
    return DualGraph(units, tuple(edges), outer, (rows, cols))


# ---------------------------------------------------------------- text format


def save_graph(graph: DualGraph) -> str:
    out = io.StringIO()
    if graph.grid_shape is not None:
        out.write(f"# grid {graph.grid_shape[0]} {graph.grid_shape[1]}\n")
    out.write(f"units {graph.n_units}\n")
    for u in graph.units:
        out.write(f"unit {u.id} pop={u.population} area={u.area!r} perim={u.perimeter!r}\n")
    for u in sorted(graph.outer):
        out.write(f"outer {u}\n")
    for e in graph.edges:
        out.write(f"edge {e.a} {e.b} shared={e.shared_boundary!r}\n")
    return out.getvalue()


def _kv(token: str, key: str, conv, lineno: int):
    name, sep, value = token.partition("=")
    if not sep or name != key:
        raise GraphFormatError(f"expected {key}=<value>, got {token!r}", lineno)
    try:
        return conv(value)
    except ValueError:
        raise GraphFormatError(f"bad value for {key}: {value!r}", lineno) from None


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphFormatError(f"expected integer, got {token!r}", lineno) from None


def load_graph(stream: TextIO | str) -> DualGraph:
    """Parse the line-oriented graph format; see :func:`save_graph`."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    n_units: Optional[int] = None
    grid_shape = None
    units: dict[int, Unit] = {}
    outer: set[int] = set()
    edges: dict[tuple[int, int], Edge] = {}
    for lineno, raw in enumerate(stream, start=1):
        line, _, comment = raw.partition("#")
        ctoks = comment.split()
        if len(ctoks) == 3 and ctoks[0] == "grid" and not line.strip():
            grid_shape = (_int(ctoks[1], lineno), _int(ctoks[2], lineno))
        toks = line.split()
        if not toks:
            continue
        kind = toks[0]
        if n_units is None:
            if kind != "units" or len(toks) != 2:
                raise GraphFormatError("first statement must be 'units <M>'", lineno)
            n_units = _int(toks[1], lineno)
            if n_units < 1:
                raise GraphFormatError("unit count must be positive", lineno)
            continue
        if kind == "unit":
            if len(toks) != 5:
                raise GraphFormatError("expected 'unit <id> pop=<int> area=<float> perim=<float>'", lineno)
            uid = _int(toks[1], lineno)
            if uid in units:
                raise GraphFormatError(f"duplicate unit id {uid}", lineno)
            if not 0 <= uid < n_units:
                raise GraphFormatError(f"unit id {uid} out of range 0..{n_units - 1}", lineno)
            pop = _kv(toks[2], "pop", int, lineno)
            area = _kv(toks[3], "area", float, lineno)
            perim = _kv(toks[4], "perim", float, lineno)
            if pop < 0:
                raise GraphFormatError("population must be nonnegative", lineno)
            if not area > 0:
                raise GraphFormatError("area must be positive", lineno)
            if not perim > 0:
                raise GraphFormatError("perimeter must be positive", lineno)
            units[uid] = Unit(uid, pop, area, perim)
        elif kind == "outer":
            if len(toks) != 2:
                raise GraphFormatError("expected 'outer <id>'", lineno)
            outer.add(_int(toks[1], lineno))
        elif kind == "edge":
            if len(toks) != 4:
                raise GraphFormatError("expected 'edge <a> <b> shared=<float>'", lineno)
            a, b = _int(toks[1], lineno), _int(toks[2], lineno)
            shared = _kv(toks[3], "shared", float, lineno)
            for x in (a, b):
                if x not in units and not 0 <= x < n_units:
                    raise GraphFormatError(f"edge references unknown id {x}", lineno)
            if a == b:
                raise GraphFormatError("self-loop edge", lineno)
            key = (min(a, b), max(a, b))
            if key in edges:
                raise GraphFormatError(f"duplicate edge {key[0]} {key[1]}", lineno)
            edges[key] = Edge(key[0], key[1], shared)
        else:
            raise GraphFormatError(f"unknown statement {kind!r}", lineno)
    if n_units is None:
        raise GraphFormatError("empty graph file")
    missing = [i for i in range(n_units) if i not in units]
    if missing:
        raise GraphFormatError(f"missing unit ids, e.g. {missing[0]}")
    for u in outer:
        if u not in units:
            raise GraphFormatError(f"outer references unknown id {u}")
    return make_graph(
        [units[i] for i in range(n_units)], edges.values(), outer=outer, grid_shape=grid_shape
    )


def read_graph_file(path: str) -> DualGraph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh)


def path_graph(n: int, population: int = 1) -> DualGraph:
    """1 x n grid; handy for small fixtures."""
    return generate_grid(1, n, PopModel.constant(population))
