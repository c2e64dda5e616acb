import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_mu, dense_series, exact_target
from weldedwalk.reduced import (
    FRAMES_HEADER,
    SCAN_HEADER,
    TABLE2,
    ReducedModel,
    WindowError,
    conjecture_scan,
    emit_frames,
    initial_state,
    predetermine_T,
    run,
    table_row,
    target_amplitude,
    target_series,
    window,
)
from weldedwalk.scalars import ExactAmplitude


def test_n1_basics():
    model = ReducedModel(1)
    assert model.dim == 6
    e0 = np.eye(6)[0]
    assert np.allclose(model.apply(e0), np.eye(6)[1])
    expected = np.zeros(6)
    expected[0] = -1 / 3
    expected[3] = 2 * math.sqrt(2) / 3
    assert np.allclose(model.apply(np.eye(6)[1]), expected, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 17])
def test_dense_matches_blocks(n):
    _, _, m_u = ReducedModel(n).dense()
    assert np.max(np.abs(m_u - dense_mu(n))) < 1e-15
    assert np.max(np.abs(m_u.T @ m_u - np.eye(4 * n + 2))) < 1e-12


def test_inverse():
    model = ReducedModel(6)
    x = np.random.default_rng(1).normal(size=model.dim)
    assert np.allclose(model.apply_inverse(model.apply(x)), x, atol=1e-14)


def test_n1_three_steps():
    model = ReducedModel(1)
    final = run(model, initial_state(model, "exact"), 3)
    assert final[5] == ExactAmplitude(24, 0, 3)
    assert final.is_unit()
    assert target_amplitude(1, 3) == pytest.approx(8 / 9, abs=1e-15)
    floats = run(model, initial_state(model), 3).amplitudes
    assert np.allclose(floats, [0, -1 / 3, 2 * math.sqrt(2) / 9, 0, 0, 8 / 9], atol=1e-15)


@pytest.mark.parametrize("n", [1, 3, 8])
def test_even_and_early_steps_vanish_exactly(n):
    model = ReducedModel(n)
    state = initial_state(model, "exact")
    for t in range(1, 3 * n + 1):
        state = run(model, state, 1)
        amp = state[model.target]
        if t % 2 == 0 or t < 2 * n:
            assert amp.is_zero()


@pytest.mark.parametrize("n", [1, 4, 12, 30])
def test_float_series_matches_dense(n):
    assert np.max(np.abs(target_series(n, 6 * n) - dense_series(n, 6 * n))) < 1e-12


@pytest.mark.parametrize("n,steps", [(3, 9), (10, 27), (25, 57)])
def test_exact_matches_fraction_oracle(n, steps):
    amp = target_amplitude(n, steps, "exact")
    r, s = exact_target(n, steps)
    assert Fraction(amp.a, 3**amp.e) == r
    assert Fraction(amp.b, 3**amp.e) == s


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 40), st.integers(0, 60))
def test_exact_state_stays_unit(n, t):
    model = ReducedModel(n)
    assert run(model, initial_state(model, "exact"), t).is_unit()


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 60), st.integers(0, 2**32 - 1))
def test_orthogonality_on_random_vectors(n, seed):
    model = ReducedModel(n)
    x = np.random.default_rng(seed).normal(size=model.dim)
    assert abs(np.linalg.norm(model.apply(x)) - np.linalg.norm(x)) < 1e-12 * np.linalg.norm(x)


def test_windows():
    assert window(1, "conjecture") == []
    with pytest.raises(WindowError):
        predetermine_T(1, "conjecture")
    assert window(6, "conjecture") == [13, 15]
    assert predetermine_T(50, "conjecture")[0] == 109
    assert predetermine_T(150, "conjecture")[0] == 323
    assert min(window(10, "theorem")) == 21
    with pytest.raises(ValueError):
        window(10, "other")


def test_predetermine_values():
    T, amp = predetermine_T(50, "conjecture")
    assert amp == pytest.approx(0.623306144977919, abs=1e-12)
    T, amp = predetermine_T(100, "conjecture")
    assert (T, amp) == (215, pytest.approx(0.5105143369773388, abs=1e-12))


def test_n6_brute_force():
    series = target_series(6, 15)
    best = max((13, 15), key=lambda t: abs(series[t]))
    assert predetermine_T(6, "conjecture")[0] == best
    assert abs(series[best]) > 6 ** (-1 / 3)


def test_scan_rows():
    rows = conjecture_scan(6, 30)
    assert all(r.passed for r in rows)
    assert SCAN_HEADER == "n,T,P_T,T_over_n,n_inv_cuberoot,pass"
    assert rows[0].csv().startswith("6,")
    assert conjecture_scan(6, 30, jobs=2) == rows


def test_scan_ratio_n100():
    (row,) = conjecture_scan(100, 100)
    assert row.T_over_n == pytest.approx(2.15)


def test_frames():
    assert FRAMES_HEADER == "T,k,amplitude"
    rows = emit_frames(1, 1)
    assert rows == [(0, 0, 1.0), (1, 1, 1.0)]
    assert emit_frames(7, 0) == [(0, 0, 1.0)]


def test_frames_rightmost_n200():
    rows = [r for r in emit_frames(200, 429) if r[0] == 429]
    last = max(rows, key=lambda r: r[1])
    assert last[1] == 4 * 200 + 1
    assert last[2] == pytest.approx(target_amplitude(200, 429), abs=1e-15)


@pytest.mark.parametrize("n", sorted(TABLE2))
def test_table_rows(n):
    row = table_row(n)
    assert row.T == TABLE2[n][0]
    assert row.odd_factors_divide
    assert not row.fingerprint.has_sqrt2_factor


def test_table_n50_factor_two():
    row = table_row(50)
    assert row.fingerprint.cancel_threes().odd_part == 738359
    assert row.fingerprint.cancel_threes().two_exponent == 151
    assert row.ratio_to_reference == Fraction(1, 2)
    assert row.value == pytest.approx(0.623306144977919, abs=1e-14)
