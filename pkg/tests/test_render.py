import re

from flipchain import Partition, PopModel, RenderSpec, generate_grid, path_graph, render_svg
from flipchain.graph import load_graph, save_graph
import pytest


def test_domino_render(grid2):
    svg = render_svg(grid2, Partition(grid2, [0, 0, 1, 1]), RenderSpec(cell_size=10))
    assert svg.count("<rect ") == 5  # 4 cells + border
    lines = re.findall(r'<line x1="(\d+)" y1="(\d+)" x2="(\d+)" y2="(\d+)"/>', svg)
    assert sorted(lines) == [("0", "10", "10", "10"), ("10", "10", "20", "10")]
    assert 'stroke="#000000"' in svg
    assert svg.startswith("<?xml") and "<svg " in svg


def test_vertical_split(grid2):
    svg = render_svg(grid2, Partition(grid2, [0, 1, 0, 1]))
    lines = re.findall(r'<line x1="(\d+)" y1="(\d+)" x2="(\d+)" y2="(\d+)"/>', svg)
    assert sorted(lines) == [("10", "0", "10", "10"), ("10", "10", "10", "20")]


def test_deterministic(grid50):
    from flipchain import initial_state
    p = initial_state(grid50, 18, seed=0)
    assert render_svg(grid50, p) == render_svg(grid50, p.copy())


def test_palette_cycles():
    g = generate_grid(1, 3, PopModel.constant(1))
    svg = render_svg(g, Partition(g, [0, 1, 2]), RenderSpec(palette=("#111111", "#222222")))
    fills = re.findall(r'fill="(#\w+)" data-district', svg)
    assert fills == ["#111111", "#222222", "#111111"]


def test_grid_metadata_survives_file():
    g = generate_grid(2, 3, PopModel.constant(1))
    assert load_graph(save_graph(g)).grid_shape == (2, 3)


def test_fallback_without_grid():
    text = save_graph(path_graph(5)).split("\n", 1)[1]
    g = load_graph(text)
    assert g.grid_shape is None
    svg = render_svg(g, Partition(g, [0, 0, 1, 1, 1]))
    assert svg.count("<circle ") == 5 and "<rect " not in svg


def test_spec_validation():
    with pytest.raises(ValueError):
        RenderSpec(cell_size=0)
    with pytest.raises(ValueError):
        RenderSpec(palette=())
