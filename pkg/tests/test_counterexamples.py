from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kreisslab.counterexamples import (BetaSequence, CNSequence, build_foguel_hankel_trunc,
                                       counterexample_powers, epsconversion_ratio, epsilon_of_x,
                                       estimate_L, foguel_hankel_norms, foguel_hankel_power_norm,
                                       make_z_grid, pisier_coeffs, pisier_coeffs_sq, pisier_X_norm,
                                       resolvent_envelope_check, resolvent_epsilon_profile)
from kreisslab.errors import InputError, InvariantViolation, RangeError
from kreisslab.linalg import op_norm


def test_beta_sequence():
    b = BetaSequence()
    assert b.values(np.array([1, 2]))[0] == pytest.approx(1 / math.log(2))
    with pytest.raises(InputError):
        b.values(np.array([0]))
    t = BetaSequence("tabulated", table=(1.0, 0.9, 0.8, 0.7))
    assert t.length == 4
    with pytest.raises(InputError):
        t.values(np.array([5]))
    with pytest.raises(InvariantViolation):
        BetaSequence("tabulated", table=(1.0, 1.0, 0.0))
    with pytest.raises(InvariantViolation):
        BetaSequence("tabulated", table=(0.1, 1.0, 20.0))


def test_cn_sequence():
    cn = CNSequence()
    assert cn.values(np.array([100]))[0] == pytest.approx(1 / math.sqrt(math.log(100)))
    L = 1.5
    N = cn.first_admissible(L)
    assert cn.values(np.array([N]))[0] * L < 1 <= cn.values(np.array([N - 1]))[0] * L
    t = CNSequence("tabulated", N0=4, table=(0.9, 0.5, 0.2))
    assert list(t.values(np.arange(4, 9))) == [0.9, 0.5, 0.2, 0.0, 0.0]
    assert t.first_admissible(2.0) == 6
    with pytest.raises(InvariantViolation):
        CNSequence("tabulated", table=(0.1, 0.2))
    with pytest.raises(InvariantViolation):
        CNSequence(N0=1)


def test_estimate_L():
    with pytest.raises(InputError):
        estimate_L(0.0)
    zs = make_z_grid(16, 16)
    small = estimate_L(0.05, (16, 32), zs)
    big = estimate_L(0.1, (16, 32), zs)
    assert 0 < small["L"] <= big["L"]
    assert small["grid_points"] == 256 and small["N"] in (16, 32)


def _brute_eps(x, c_of_N, L, N0, Nmax):
    N = np.arange(N0, Nmax + 1, dtype=float)
    return float(np.max(c_of_N(N) * L - np.exp(-N * math.log1p(x))))


@pytest.mark.parametrize("x", [0.3, 0.05, 0.01])
def test_epsilon_of_x_matches_scan(x):
    L = 0.8
    ref = _brute_eps(x, lambda N: 1 / np.sqrt(np.log(N)), L, 2, 2_000_000)
    assert epsilon_of_x(x, CNSequence(), L) == pytest.approx(ref, abs=1e-9)


def test_epsilon_of_x_tabulated():
    cn = CNSequence("tabulated", N0=2, table=(0.9, 0.6, 0.4, 0.3))
    x, L = 0.2, 1.0
    N = np.arange(2, 400)
    ref = float(np.max(cn.values(N) * L - (1 + x) ** -N.astype(float)))
    assert epsilon_of_x(x, cn, L) == pytest.approx(ref, abs=1e-15)
    with pytest.raises(InputError):
        epsilon_of_x(0.0, cn, L)


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-4, 1.0), st.floats(1e-4, 1.0), st.floats(0.1, 2.0))
def test_epsilon_of_x_monotone(x1, x2, L):
    lo, hi = sorted((x1, x2))
    assert epsilon_of_x(lo, CNSequence(), L) <= epsilon_of_x(hi, CNSequence(), L) + 1e-12


def test_envelope_plain_shift():
    zs = make_z_grid(12, 12)
    slack = resolvent_envelope_check(6, 0.0, 1.0, zs)
    assert -1e-10 <= slack <= 1e-2
    with pytest.raises(InputError):
        resolvent_envelope_check(6, 1.0, 1.0, zs)


def test_counterexample_powers():
    rows = counterexample_powers(CNSequence(), [16, 256])
    for row in rows:
        assert row["power"] >= row["lower"]
        assert row["c_N"] == pytest.approx(1 / math.sqrt(math.log(row["N"])))
    assert rows[1]["power"] > rows[0]["power"]


def test_pisier_coefficients():
    b = BetaSequence()
    assert pisier_coeffs(b, 1) ** 2 == pytest.approx(1 / (4 * math.log(3)) - 1 / (9 * math.log(4)), rel=1e-13)
    sq = pisier_coeffs_sq(b, 50)
    # telescoping: sum_{n<K} |a_n|^2 = beta_1 - beta_{K+1}/(K+1)^2
    assert sq.sum() == pytest.approx(1 / math.log(2) - 1 / (51 ** 2 * math.log(52)), rel=1e-13)


@pytest.mark.parametrize("n,M", [(1, 8), (3, 10), (5, 40)])
def test_pisier_closed_form(n, M):
    mat, closed = pisier_X_norm(BetaSequence(), n, M)
    assert mat == pytest.approx(closed, rel=1e-10)
    assert mat <= math.sqrt(1 / math.log(n + 1))


def test_pisier_input():
    with pytest.raises(InputError):
        pisier_X_norm(BetaSequence(), 3, 4)


@pytest.mark.parametrize("M", [3, 5, 7])
def test_power_norm_matches_dense(M):
    beta = BetaSequence()
    F = build_foguel_hankel_trunc(beta, M).toarray()
    assert F.shape == (2 * M * M, 2 * M * M)
    norms = foguel_hankel_norms(beta, M, 2 * M)
    for n in range(1, 2 * M + 1):
        assert norms[n - 1] == pytest.approx(op_norm(np.linalg.matrix_power(F, n)), rel=1e-10, abs=1e-14)


def test_power_norm_without_hankel_part():
    a = np.zeros(6)
    assert [foguel_hankel_power_norm(a, 6, n) for n in (1, 5)] == [1.0, 1.0]
    with pytest.raises(InputError):
        foguel_hankel_power_norm(a, 6, 0)
    with pytest.raises(InputError):
        build_foguel_hankel_trunc(BetaSequence(), 1)


def test_epsconversion_ratio():
    a = 0.5
    series = math.fsum(a ** n / math.sqrt(math.log(n)) for n in range(2, 200))
    assert epsconversion_ratio(a) == pytest.approx(series / (math.log(2) ** -0.5 / 0.5), rel=1e-13)
    assert epsconversion_ratio(a) > 0
    with pytest.raises(InputError):
        epsconversion_ratio(1.0)


def test_resolvent_epsilon_profile():
    total, eps = resolvent_epsilon_profile(np.ones(400), 2.0)
    assert total == pytest.approx(1.0) and eps == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(RangeError):
        resolvent_epsilon_profile(np.ones(10), 1.01)
    with pytest.raises(InputError):
        resolvent_epsilon_profile(np.ones(10), 1.0)
