import io

import numpy as np
import pytest

from flipchain import (
    Edge, GraphFormatError, PopModel, Unit, generate_grid, load_graph, make_graph, path_graph,
    save_graph,
)

TWO = """units 2
unit 0 pop=5 area=1 perim=4
unit 1 pop=5 area=1 perim=4
edge 0 1 shared=1
"""


def test_zero_population_allowed():
    g = load_graph(TWO.replace("unit 1 pop=5", "unit 1 pop=0"))
    assert g.units[1].population == 0


def test_two_unit_file():
    g = load_graph(TWO)
    assert g.n_units == 2
    assert len(g.edges) == 1
    assert g.adjacency == ((1,), (0,))
    assert g.total_population == 10


def test_unknown_id_reports_line():
    with pytest.raises(GraphFormatError) as ei:
        load_graph(TWO.replace("edge 0 1", "edge 0 2"))
    assert ei.value.lineno == 4
    assert "unknown" in str(ei.value)


def test_disconnected_rejected():
    text = "units 4\n" + "".join(f"unit {i} pop=1 area=1 perim=4\n" for i in range(4))
    text += "edge 0 1 shared=1\nedge 2 3 shared=1\n"
    with pytest.raises(GraphFormatError, match="connected"):
        load_graph(text)


@pytest.mark.parametrize("bad, what", [
    ("unit 1 pop=-1 area=1 perim=4", "pop"),
    ("unit 1 pop=5 area=-1 perim=4", "area"),
    ("unit 1 pop=x area=1 perim=4", "pop"),
    ("unit 0 pop=5 area=1 perim=4", "duplicate"),
])
def test_bad_unit_lines(bad, what):
    with pytest.raises(GraphFormatError):
        load_graph(TWO.replace("unit 1 pop=5 area=1 perim=4", bad))


def test_shared_longer_than_perimeter():
    with pytest.raises(GraphFormatError):
        load_graph(TWO.replace("shared=1", "shared=5"))


def test_duplicate_edge():
    with pytest.raises(GraphFormatError):
        load_graph(TWO + "edge 1 0 shared=1\n")


def test_grid_2x2():
    g = generate_grid(2, 2, PopModel.constant(100), seed=3)
    assert g.n_units == 4 and len(g.edges) == 4
    assert all(u.population == 100 and u.area == 1 and u.perimeter == 4 for u in g.units)
    assert g.grid_shape == (2, 2)


def test_grid_50x50_edge_count(grid50):
    assert grid50.n_units == 2500
    # brute-force scan of rook neighbours versus 2*R*(C-1)
    scan = sum(1 for r in range(50) for c in range(50) for dr, dc in ((0, 1), (1, 0))
               if r + dr < 50 and c + dc < 50)
    assert len(grid50.edges) == scan == 2 * 50 * 49
    assert min(u.population for u in grid50.units) >= 1


def test_grid_1x3_is_path():
    g = generate_grid(1, 3, PopModel.constant(1))
    assert [(e.a, e.b) for e in g.edges] == [(0, 1), (1, 2)]
    assert g == path_graph(3)


def test_normal_population_reproducible():
    a = generate_grid(5, 5, PopModel.normal(100, 50), seed=9)
    b = generate_grid(5, 5, PopModel.normal(100, 50), seed=9)
    c = generate_grid(5, 5, PopModel.normal(100, 50), seed=10)
    assert a == b
    assert a != c


@pytest.mark.parametrize("text", ["normal:100", "constant", "uniform:1:2", "constant:-1", "normal:1:-1"])
def test_pop_model_parse_errors(text):
    with pytest.raises(ValueError):
        PopModel.parse(text)


def test_pop_model_parse():
    assert PopModel.parse("constant:7") == PopModel.constant(7)
    assert PopModel.parse("normal:100:50") == PopModel.normal(100, 50)


def test_round_trip_grid(grid50):
    text = save_graph(grid50)
    g = load_graph(text)
    assert g == grid50
    assert save_graph(g) == text


def test_round_trip_two_unit():
    g = load_graph(TWO)
    assert load_graph(save_graph(g)) == g


def test_edge_order_normalized():
    units = [Unit(i, 1, 1.0, 4.0) for i in range(3)]
    g = make_graph(units, [Edge(2, 1, 1.0), Edge(1, 0, 1.0)])
    assert [(e.a, e.b) for e in g.edges] == [(0, 1), (1, 2)]
    shuffled = "units 3\n" + "".join(f"unit {i} pop=1 area=1 perim=4\n" for i in (2, 0, 1))
    shuffled += "edge 2 1 shared=1\nedge 1 0 shared=1\n"
    assert load_graph(io.StringIO(shuffled)) == g


def test_outer_defaults_to_all_units():
    g = load_graph(TWO)
    assert g.outer_units == frozenset({0, 1})
    grid = generate_grid(3, 3, PopModel.constant(1))
    assert 4 not in grid.outer_units and len(grid.outer_units) == 8


def test_arrays_csr_consistent(grid50):
    a = grid50.arrays
    for u in (0, 49, 1275, 2499):
        nb = a.nbr[a.nbr_ptr[u]:a.nbr_ptr[u + 1]]
        assert tuple(nb) == grid50.adjacency[u]
    assert np.all(a.edge_a < a.edge_b)
