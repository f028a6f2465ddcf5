"""SVG snapshots of district plans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .graph import DualGraph
from .partition import Partition

DEFAULT_PALETTE = (
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080", "#e6beff",
    "#9a6324", "#fffac8", "#800000", "#aaffc3", "#808000", "#ffd8b1",
)


@dataclass(frozen=True)
class RenderSpec:
    cell_size: int = 10
    palette: tuple[str, ...] = field(default=DEFAULT_PALETTE)
    boundary_stroke: str = "#000000"
    boundary_width: float = 1.0

    def __post_init__(self):
        if self.cell_size < 1:
            raise ValueError("cell_size must be >= 1")
        if not self.palette:
            raise ValueError("palette must not be empty")


def render_svg(graph: DualGraph, partition: Partition, spec: RenderSpec = RenderSpec()) -> str:
    """Grid graphs draw one rect per cell with black district borders; other
    graphs fall back to a node-link picture on a square lattice."""
    if graph.grid_shape is None:
        return _render_nodes(graph, partition, spec)
    rows, cols = graph.grid_shape
    a = partition.assignment
    s = spec.cell_size
    w, h = cols * s, rows * s
    pal = spec.palette
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">\n',
        '<g id="cells" stroke="none">\n',
    ]
    for r in range(rows):
        for c in range(cols):
            d = int(a[r * cols + c])
            out.append(f'<rect x="{c * s}" y="{r * s}" width="{s}" height="{s}" '
                       f'fill="{escape(pal[d % len(pal)])}" data-district="{d}"/>\n')
    out.append("</g>\n")
    out.append(f'<g id="boundaries" stroke="{escape(spec.boundary_stroke)}" '
               f'stroke-width="{spec.boundary_width:g}" stroke-linecap="square">\n')
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            # vertical segment on the right side of the cell
            if c + 1 < cols and a[u] != a[u + 1]:
                out.append(_line((c + 1) * s, r * s, (c + 1) * s, (r + 1) * s))
            # horizontal segment below the cell
            if r + 1 < rows and a[u] != a[u + cols]:
                out.append(_line(c * s, (r + 1) * s, (c + 1) * s, (r + 1) * s))
    out.append(f'<rect id="border" x="0" y="0" width="{w}" height="{h}" fill="none"/>\n')
    out.append("</g>\n</svg>\n")
    return "".join(out)


def _line(x1, y1, x2, y2) -> str:
    return f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>\n'


def _render_nodes(graph: DualGraph, partition: Partition, spec: RenderSpec) -> str:
    m = graph.n_units
    cols = max(1, math.ceil(math.sqrt(m)))
    rows = math.ceil(m / cols)
    s = spec.cell_size * 2
    rad = spec.cell_size * 0.6
    a = partition.assignment
    pal = spec.palette

    def pos(u):
        return (u % cols) * s + s / 2, (u // cols) * s + s / 2

    w, h = cols * s, rows * s
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">\n',
        '<g id="edges" stroke="#999999" stroke-width="0.5">\n',
    ]
    for e in graph.edges:
        (x1, y1), (x2, y2) = pos(e.a), pos(e.b)
        out.append(_line(f"{x1:g}", f"{y1:g}", f"{x2:g}", f"{y2:g}"))
    out.append("</g>\n")
    out.append(f'<g id="units" stroke="{escape(spec.boundary_stroke)}" '
               f'stroke-width="{spec.boundary_width:g}">\n')
    for u in range(m):
        x, y = pos(u)
        d = int(a[u])
        out.append(f'<circle cx="{x:g}" cy="{y:g}" r="{rad:g}" fill="{escape(pal[d % len(pal)])}" '
                   f'data-district="{d}"/>\n')
    out.append("</g>\n</svg>\n")
    return "".join(out)
