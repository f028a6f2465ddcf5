import numpy as np
import pytest

from flipchain import (
    ChainConfig, ConstraintGates, Partition, PopModel, StateIndex, canonical, enumerate_partitions,
    enumerate_partitions_bruteforce, generate_grid, path_graph, tv_distance, uniformity_check,
)
from flipchain.oracle import InstanceTooLarge, StateOutsideSpace, empirical_distribution


def test_canonical():
    assert canonical([2, 2, 0, 1]) == (0, 0, 1, 2)
    assert canonical(canonical([5, 3, 5])) == canonical([5, 3, 5]) == (0, 1, 0)


def test_2x2_size_equal(grid2):
    states = enumerate_partitions(grid2, 2, size_equal=True)
    assert sorted(states) == [(0, 0, 1, 1), (0, 1, 0, 1)]
    assert (0, 1, 1, 0) not in states


def test_path_k2():
    assert sorted(enumerate_partitions(path_graph(3), 2)) == [(0, 0, 1), (0, 1, 1)]


def test_k1_single_state(grid3):
    assert enumerate_partitions(grid3, 1) == [(0,) * 9]


@pytest.mark.parametrize("shape, k", [((2, 2), 2), ((2, 3), 2), ((3, 3), 2), ((3, 3), 3), ((2, 4), 3)])
@pytest.mark.parametrize("flags", [dict(), dict(simply_connected=True), dict(size_equal=True)])
def test_enumerators_agree(shape, k, flags):
    g = generate_grid(*shape, PopModel.constant(1))
    assert set(enumerate_partitions(g, k, **flags)) == set(enumerate_partitions_bruteforce(g, k, **flags))


def test_pop_dev_filter():
    g = generate_grid(2, 3, PopModel.normal(50, 20), seed=4)
    a = set(enumerate_partitions(g, 2, pop_dev_max=0.3))
    b = set(enumerate_partitions_bruteforce(g, 2, pop_dev_max=0.3))
    assert a == b and len(a) < len(enumerate_partitions(g, 2))


def test_state_counts(grid3):
    assert len(enumerate_partitions(grid3, 3)) == 258
    assert len(enumerate_partitions(grid3, 3, simply_connected=True)) == 254
    assert len(enumerate_partitions(grid3, 3, size_equal=True)) == 10


def test_guard():
    with pytest.raises(InstanceTooLarge, match="units"):
        enumerate_partitions(generate_grid(5, 5, PopModel.constant(1)), 2)
    with pytest.raises(InstanceTooLarge):
        enumerate_partitions_bruteforce(generate_grid(4, 6, PopModel.constant(1)), 3)


def test_tv_examples():
    assert tv_distance([1, 2, 3], [1, 2, 3]) == 0
    assert tv_distance([1, 0], [0, 1]) == 1
    assert tv_distance([0.5, 0.5], [0.25, 0.75]) == 0.25
    with pytest.raises(ValueError):
        tv_distance([1, 2], [1, 2, 3])


def test_state_index(grid3):
    idx = StateIndex(enumerate_partitions(grid3, 3))
    s = idx.states[17]
    relabeled = [2 - x for x in s]
    assert idx.index(relabeled) == 17 and relabeled in idx
    assert idx.dump().splitlines()[17] == " ".join(map(str, s))
    with pytest.raises(StateOutsideSpace):
        idx.index([0] * 9)


def test_path_two_state_frequency():
    g = path_graph(3)
    cfg = ChainConfig("metropolis", beta=0.0, gates=ConstraintGates(hole_test=False), seed=0)
    idx = StateIndex(enumerate_partitions(g, 2))
    hist = empirical_distribution(g, 2, cfg, 100_000, 1000, 1, index=idx)
    assert hist.sum() == 100_000
    assert np.all(np.abs(hist / hist.sum() - 0.5) < 0.02)


def test_outside_state_is_hard_error(grid3):
    # an index missing states the chain can reach
    idx = StateIndex(enumerate_partitions(grid3, 2, size_equal=True))
    cfg = ChainConfig("metropolis", seed=0)
    with pytest.raises(StateOutsideSpace):
        empirical_distribution(grid3, 2, cfg, 1000, 0, 1, index=idx)


def test_chain_stays_in_space(grid3):
    for hole in (True, False):
        cfg = ChainConfig("metropolis", gates=ConstraintGates(hole_test=hole), seed=3)
        idx = StateIndex(enumerate_partitions(grid3, 3, simply_connected=hole))
        hist = empirical_distribution(grid3, 3, cfg, 20_000, 100, 3, index=idx)
        assert hist.sum() == 20_000


def test_uniformity_small(grid2):
    cfg = ChainConfig("metropolis", seed=1)
    rep = uniformity_check(grid2, 2, cfg, 20_000, 1000, 10, size_equal=True, min_kept=20_000)
    assert rep.n_target == 2 and rep.kept >= 20_000 and rep.tv < 0.05


def test_uniformity_k1(grid3):
    rep = uniformity_check(grid3, 1, ChainConfig("metropolis"), 100, 0, 1)
    assert rep.tv == 0 and rep.n_states == 1
