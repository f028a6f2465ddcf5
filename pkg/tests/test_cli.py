import subprocess
import sys

import numpy as np
import pytest

from flipchain import PopModel, generate_grid, initial_state, load_graph
from flipchain.chain import load_trace
from flipchain.cli import main
from flipchain.partition import load_partition

from conftest import FIXTURES


def cli(*args):
    try:
        return main([str(a) for a in args])
    except SystemExit as exc:
        return exc.code


@pytest.fixture
def g50(tmp_path):
    path = tmp_path / "g.txt"
    assert cli("gen-grid", "--rows", 50, "--cols", 50, "--pop", "normal:100:50", "--seed", 1, "--out", path) == 0
    return path


def test_gen_grid_file(g50):
    g = load_graph(g50.read_text())
    assert g.n_units == 2500 and g == generate_grid(50, 50, PopModel.normal(100, 50), 1)


def test_gen_grid_stdout(capsys):
    assert cli("gen-grid", "--rows", 2, "--cols", 2, "--pop", "constant:100", "--seed", 0, "--out", "-") == 0
    g = load_graph(capsys.readouterr().out)
    assert g.n_units == 4


@pytest.mark.parametrize("pop", ["normal:100", "gamma:1:2", "constant:x"])
def test_gen_grid_bad_pop(pop, capsys):
    assert cli("gen-grid", "--rows", 2, "--cols", 2, "--pop", pop) == 2
    assert "usage" in capsys.readouterr().err


def test_run_outputs(g50, tmp_path):
    t, p, s = tmp_path / "t.csv", tmp_path / "p.txt", tmp_path / "p.svg"
    rc = cli("run", "--graph", g50, "-K", 18, "--prerun", 4000, "--steps", 2000, "--mode", "plain",
             "--seed", 7, "--trace", t, "--out", p, "--svg", s)
    assert rc == 0
    g = load_graph(g50.read_text())
    part = load_partition(p.read_text(), g)
    trace = load_trace(t.read_text())
    assert part.k == 18 and len(trace) == 6001 and trace.step[-1] == 6000
    assert s.read_text().count("<rect ") == 2501


def test_run_zero_steps_is_initial(g50, tmp_path):
    p = tmp_path / "p.txt"
    assert cli("run", "--graph", g50, "-K", 18, "--prerun", 0, "--steps", 0, "--seed", 3, "--out", p) == 0
    g = load_graph(g50.read_text())
    assert load_partition(p.read_text(), g) == initial_state(g, 18, np.random.default_rng(3))


@pytest.mark.parametrize("flags", [
    ["--mode", "plain", "--beta", "1"],
    ["--mode", "metropolis", "--beta-end", "3"],
    ["--mode", "plain", "--schedule", "linear"],
    ["--weights", "1"],
    ["--hole-test", "maybe"],
    ["--compact-min", "-1"],
    ["--mode", "anneal", "--beta", "4", "--beta-end", "1"],
])
def test_run_bad_flags(g50, flags):
    assert cli("run", "--graph", g50, "-K", 3, *flags) == 2


def test_run_unreadable_graph(tmp_path, capsys):
    assert cli("run", "--graph", tmp_path / "missing.txt", "-K", 2) == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("units 2\nunit 0 pop=1 area=1 perim=4\n")
    assert cli("run", "--graph", bad, "-K", 2) == 1
    assert "error" in capsys.readouterr().err


def test_run_bad_k(g50):
    assert cli("run", "--graph", g50, "-K", 1) == 1


def test_run_gated(g50, tmp_path):
    t = tmp_path / "t.csv"
    rc = cli("run", "--graph", g50, "-K", 18, "--prerun", 2000, "--steps", 2000, "--mode", "anneal",
             "--beta", "0", "--beta-end", "50", "--weights", "20:1", "--compact-min", "3.0",
             "--pop-dev-max", "0.11", "--seed", 0, "--trace", t, "--trace-every", 100)
    assert rc == 0
    assert load_trace(t.read_text()).step[-1] == 4000


def test_replicates(g50, tmp_path):
    t = tmp_path / "r.csv"
    assert cli("run", "--graph", g50, "-K", 18, "--prerun", 1000, "--steps", 1000, "--seed", 5,
               "--trace", t, "--replicates", 3) == 0
    traces = [(tmp_path / f"r.csv.{i}").read_text() for i in range(3)]
    single = tmp_path / "one.csv"
    assert cli("run", "--graph", g50, "-K", 18, "--prerun", 1000, "--steps", 1000, "--seed", 6,
               "--trace", single) == 0
    assert traces[1] == single.read_text()
    assert len(set(traces)) == 3


def write_eval_inputs(tmp_path):
    return FIXTURES / "pa_18_path.txt", FIXTURES / "pa_18_singletons.txt", FIXTURES / "pa_2010_votes.csv"


def test_eval_pa(tmp_path, capsys):
    g, p, v = write_eval_inputs(tmp_path)
    out_csv = tmp_path / "r.csv"
    assert cli("eval", "--graph", g, "--partition", p, "--votes", v, "--csv", out_csv) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[-3] == "Republican: 13 seats (72.2% of seats), 48.8% of votes"
    assert out[-2] == "Democrat: 5 seats (27.8% of seats), 50.3% of votes"
    assert out[-1] == "Other: 0 seats (0.0% of seats), 0.9% of votes"
    assert out_csv.read_text().splitlines()[-1] == "% of seats,72.2,27.8,0.0,,"


def test_eval_missing_unit(tmp_path, capsys):
    g, p, v = write_eval_inputs(tmp_path)
    short = tmp_path / "v.csv"
    short.write_text("\n".join(v.read_text().splitlines()[:-1]) + "\n")
    assert cli("eval", "--graph", g, "--partition", p, "--votes", short) == 1
    assert "missing unit 17" in capsys.readouterr().err


@pytest.fixture
def g2x2(tmp_path):
    path = tmp_path / "g2.txt"
    cli("gen-grid", "--rows", 2, "--cols", 2, "--pop", "constant:1", "--out", path)
    return path


def test_enumerate_lists_states(g2x2, tmp_path):
    out = tmp_path / "s.txt"
    assert cli("enumerate", "--graph", g2x2, "-K", 2, "--size-equal", "--out", out) == 0
    assert out.read_text().splitlines() == ["0 0 1 1", "0 1 0 1"]


def test_enumerate_uniformity(g2x2, tmp_path, capsys):
    h = tmp_path / "h.csv"
    rc = cli("enumerate", "--graph", g2x2, "-K", 2, "--size-equal", "--uniformity-check", "--samples", 50000,
             "--burn-in", 1000, "--thin", 10, "--seed", 0, "--out", tmp_path / "s.txt", "--hist", h)
    assert rc == 0
    line = [l for l in capsys.readouterr().out.splitlines() if l.startswith("tv_distance")][0]
    assert float(line.split()[1]) < 0.05
    rows = h.read_text().splitlines()
    assert rows[0] == "state_index,count" and len(rows) == 3


def test_enumerate_failing_check_exits_3(g2x2, tmp_path):
    # a handful of samples cannot look uniform
    rc = cli("enumerate", "--graph", g2x2, "-K", 2, "--uniformity-check", "--samples", 1, "--burn-in", 0,
             "--thin", 1, "--out", tmp_path / "s.txt")
    assert rc == 3


def test_enumerate_k1(g2x2, capsys):
    assert cli("enumerate", "--graph", g2x2, "-K", 1, "--uniformity-check") == 0
    out = capsys.readouterr().out
    assert "0 0 0 0" in out and "tv_distance 0.000000" in out


def test_enumerate_too_large(g50, capsys):
    assert cli("enumerate", "--graph", g50, "-K", 2) == 1
    assert "units" in capsys.readouterr().err


def test_render_command(g2x2, tmp_path):
    p = tmp_path / "p.txt"
    p.write_text("0 0\n1 0\n2 1\n3 1\n")
    s = tmp_path / "p.svg"
    assert cli("render", "--graph", g2x2, "--partition", p, "--svg", s) == 0
    assert s.read_text().count("<line ") == 2


def test_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "flipchain.cli", "gen-grid", "--rows", "1", "--cols", "2",
                        "--pop", "constant:3"], capture_output=True, text=True)
    assert r.returncode == 0 and "units 2" in r.stdout
    r = subprocess.run([sys.executable, "-m", "flipchain.cli"], capture_output=True, text=True)
    assert r.returncode == 2
