import math

import numpy as np
from hypothesis import given, settings, strategies as st

from flipchain import (
    ConstraintGates, FlipProposal, Partition, PopModel, canonical, district_holes, generate_grid, initial_state,
    is_valid_flip, load_graph, propose_flip, apply_flip, recompute_stats, save_graph,
)
from flipchain.partition import _induced_connected, recompute_cut_edges
from flipchain.scoring import balanced_from_populations

from conftest import BACKENDS

grids = st.tuples(st.integers(2, 6), st.integers(2, 6), st.integers(0, 2**31))


def walk_states(g, k, seed, n, backend):
    """Yield (partition, proposal) pairs along a random walk of valid flips."""
    rng = np.random.default_rng(seed)
    p = initial_state(g, k, rng, backend=backend)
    for _ in range(n):
        pr = propose_flip(p, rng)
        yield p, pr
        if is_valid_flip(g, p, pr):
            apply_flip(p, pr)


def valid_from_scratch(g, a, pr, hole_test=True):
    k = int(a.max()) + 1
    if (a == pr.source).sum() < 2:
        return False
    b = a.copy()
    b[pr.unit] = pr.target
    if not all(_induced_connected(g, b, d) for d in range(k)):
        return False
    if hole_test:
        return all(district_holes(g, b, d) <= district_holes(g, a, d) for d in range(k))
    return True


@settings(max_examples=25, deadline=None)
@given(grids, st.integers(2, 4), st.sampled_from(BACKENDS), st.booleans())
def test_validity_matches_oracle(shape, k, backend, hole_test):
    r, c, seed = shape
    g = generate_grid(r, c, PopModel.normal(20, 8), seed=seed % 1000)
    gates = ConstraintGates(hole_test=hole_test)
    for p, pr in walk_states(g, k, seed, 150, backend):
        a = p.assignment
        assert is_valid_flip(g, p, pr, gates) == valid_from_scratch(g, a, pr, hole_test)


@settings(max_examples=25, deadline=None)
@given(grids, st.integers(2, 5), st.sampled_from(BACKENDS))
def test_incremental_stats(shape, k, backend):
    r, c, seed = shape
    g = generate_grid(r, c, PopModel.normal(50, 30), seed=seed % 1000)
    p = None
    for p, _ in walk_states(g, k, seed, 200, backend):
        pass
    want = recompute_stats(g, p.assignment, k)
    for x, y in zip(p.stats, want):
        assert x.population == y.population and x.unit_count == y.unit_count
        assert math.isclose(x.area, y.area, rel_tol=1e-9)
        assert math.isclose(x.circumference, y.circumference, rel_tol=1e-9)
    assert p.cut_edges == recompute_cut_edges(g, p.assignment)
    assert p.cut_size == len(p.cut_edges)


@given(st.lists(st.integers(0, 6), min_size=1, max_size=20))
def test_canonical_properties(labels):
    c = canonical(labels)
    assert canonical(c) == c
    perm = {x: (x * 5 + 3) % 7 for x in range(7)}
    assert canonical([perm[x] for x in labels]) == c
    assert c[0] == 0 and max(c) + 1 == len(set(labels))


@given(st.lists(st.integers(1, 10**6), min_size=2, max_size=18), st.integers(2, 1000))
def test_balanced_scale_invariant(pops, c):
    a = balanced_from_populations(pops)
    b = balanced_from_populations([c * p for p in pops])
    assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-15)
    assert a >= 0


@settings(max_examples=30, deadline=None)
@given(grids)
def test_graph_round_trip(shape):
    r, c, seed = shape
    g = generate_grid(r, c, PopModel.normal(100, 50), seed=seed)
    assert load_graph(save_graph(g)) == g


@settings(max_examples=20, deadline=None)
@given(grids, st.integers(2, 4))
def test_flip_is_involution(shape, k):
    r, c, seed = shape
    g = generate_grid(r, c, PopModel.constant(1))
    rng = np.random.default_rng(seed)
    p = initial_state(g, k, rng)
    for _ in range(50):
        pr = propose_flip(p, rng)
        if is_valid_flip(g, p, pr):
            before = p.copy()
            apply_flip(p, pr)

            apply_flip(p, FlipProposal(pr.unit, pr.target, pr.source, pr.via_edge))
            assert p == before and p.stats == before.stats
            apply_flip(p, pr)
