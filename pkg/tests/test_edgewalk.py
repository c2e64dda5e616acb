import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weldedwalk.edgewalk import (
    EdgeState,
    edge_space,
    initial_state,
    inverse_step,
    lift_reduced,
    project_reduced,
    vertex_distribution,
    vertex_probability,
    walk_step,
)
from weldedwalk.graph import QueryLedger, generate
from weldedwalk.reduced import ReducedModel, target_series


def test_dimension():
    for n in (2, 3, 5):
        assert edge_space(generate(n, 1)).dim == 6 * 2 ** (n + 1) - 8


def test_initial_state():
    tree = generate(2, 3)
    ledger = QueryLedger()
    state = initial_state(tree, ledger)
    nz = state.amplitudes[state.amplitudes != 0]
    assert len(nz) == 2 and np.allclose(nz, 1 / math.sqrt(2))
    assert state.norm_sq() == pytest.approx(1.0, abs=1e-15)
    coeffs, residual = project_reduced(tree, state)
    assert np.allclose(coeffs, np.eye(10)[0]) and residual < 1e-15
    assert vertex_probability(tree, state, tree.entrance) == pytest.approx(1.0)
    assert ledger.quantum_oracle_calls == 2


def test_one_step_matches_reduced():
    tree = generate(2, 3)
    state = walk_step(tree, initial_state(tree))
    coeffs, residual = project_reduced(tree, state)
    assert np.allclose(coeffs, np.eye(10)[1], atol=1e-12) and residual < 1e-12


def test_shift_is_involution():
    tree = generate(3, 4)
    space = edge_space(tree)
    x = np.random.default_rng(0).normal(size=space.dim)
    assert np.array_equal(x[space.reverse][space.reverse], x)


def test_inverse_step():
    tree = generate(3, 4)
    space = edge_space(tree)
    x = EdgeState(np.random.default_rng(1).normal(size=space.dim), 0, space)
    back = inverse_step(tree, walk_step(tree, x))
    assert np.allclose(back.amplitudes, x.amplitudes, atol=1e-13)


@pytest.mark.parametrize("cost", [2, 4])
def test_cost_charges(cost):
    tree = generate(2, 1)
    ledger = QueryLedger()
    state = initial_state(tree, ledger)
    for _ in range(5):
        state = walk_step(tree, state, ledger, cost)
    assert ledger.quantum_oracle_calls == 2 + 5 * cost
    assert ledger.breakdown == {"preparation": 2, "walk": 5 * cost}


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32))
def test_exit_probability_matches_reduced(n, seed):
    tree = generate(n, seed)
    state = initial_state(tree)
    series = target_series(n, 3 * n) ** 2
    for t in range(1, 3 * n + 1):
        state = walk_step(tree, state)
        assert abs(vertex_probability(tree, state, tree.exit) - series[t]) < 1e-10
    assert vertex_distribution(tree, state).sum() == pytest.approx(1.0, abs=1e-10)


def test_seed_independence():
    n, t = 4, 11
    probs = []
    for seed in range(4):
        tree = generate(n, seed)
        state = initial_state(tree)
        for _ in range(t):
            state = walk_step(tree, state)
        probs.append(vertex_probability(tree, state, tree.exit))
    assert max(probs) - min(probs) < 1e-10


def test_leaving_the_subspace():
    tree = generate(3, 2)
    space = edge_space(tree)
    x = np.zeros(space.dim)
    x[space.offset[1]] = 1.0  # one slot of one layer-1 vertex only
    _, residual = project_reduced(tree, EdgeState(x, 0, space))
    assert residual > 0.1


def test_lift_round_trip():
    tree = generate(3, 2)
    coeffs = np.random.default_rng(3).normal(size=14) + 1j * np.random.default_rng(4).normal(size=14)
    back, residual = project_reduced(tree, lift_reduced(tree, coeffs))
    assert np.allclose(back, coeffs) and residual < 1e-12


def test_full_state_tracks_reduced_vector():
    n = 4
    model = ReducedModel(n)
    for seed in range(3):
        tree = generate(n, seed)
        state = initial_state(tree)
        x = np.eye(model.dim)[0]
        for _ in range(3 * n):
            state = walk_step(tree, state)
            x = model.apply(x)
            coeffs, residual = project_reduced(tree, state)
            assert np.max(np.abs(coeffs - x)) < 1e-10 and residual < 1e-10


def test_dump_csv():
    tree = generate(2, 0)
    text = initial_state(tree).dump_csv(tree)
    lines = text.splitlines()
    assert lines[0] == "vertex_hex,port,amplitude"
    assert len(lines) == 3 and all(line.startswith("0,") for line in lines[1:])
