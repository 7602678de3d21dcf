from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kreisslab.dlp import (EpsilonProfile, VTypeCurve, _G, case_of, circle_radius, decompose,
                           hypothesis_integral, k_spectral_estimate, mu_dlp, poisson_factorization_check,
                           reproducing_residual, ritt_resolvent_check, ritt_test, solve_angles,
                           verify_k_spectral, vtype_admissibility, vtype_r)
from kreisslab.errors import (AdmissibilityError, ClaimViolation, InputError, InvariantViolation,
                              PreconditionError)
from kreisslab.linalg import op_norm, spectral_radius

CURVE = VTypeCurve("power_law", beta=1.0, p=0.5)
EPS = EpsilonProfile("power", eps0=0.5, q=1.0, nu0=1.0)


def test_vtype_r_examples():
    assert vtype_r(CURVE, 0.25) == pytest.approx(1.5, rel=1e-15)
    assert vtype_r(CURVE, 0.0) == 1.0
    assert vtype_r(CURVE, -0.25) == pytest.approx(1.5, rel=1e-15)
    assert vtype_r(CURVE, 2.5) == vtype_r(CURVE, 1.0) == pytest.approx(2.0)
    asym = VTypeCurve("power_law", beta=1.0, p=0.5, delta_minus=0.25, delta_plus=1.0)
    assert asym.r(-0.25) == pytest.approx(asym.r(1.0), rel=1e-14)
    with pytest.raises(InputError):
        CURVE.r(4.0)


def test_curve_invariants():
    for kw in ({"p": 1.0}, {"beta": 0.0}, {"delta_plus": 3.2}):
        with pytest.raises(InvariantViolation):
            VTypeCurve("power_law", **kw)
    with pytest.raises(InvariantViolation):
        VTypeCurve("sampled", samples_theta=(0.1, 0.2, -0.1), samples_r=(1.1, 1.2, 1.1))
    with pytest.raises(InvariantViolation):
        VTypeCurve("sampled", samples_theta=(0.1, 0.2, -0.1, -0.2), samples_r=(1.2, 1.1, 1.1, 1.2))


def test_admissibility_sqrt_profile():
    out = vtype_admissibility(CURVE)
    assert out["integral"] == pytest.approx(4.0, abs=1e-6)
    assert out["limsup_trend"] == "decreasing"


def test_admissibility_sampled_sqrt_profile():
    th = np.array([0.01, 0.1, 0.5, 1.0])
    curve = VTypeCurve("sampled", samples_theta=tuple(np.r_[th, -th]), samples_r=tuple(np.tile(1 + th ** 0.5, 2)))
    assert curve.local_exponent(1) == pytest.approx(0.5)
    assert vtype_admissibility(curve)["integral"] == pytest.approx(4.0, abs=1e-6)


def test_admissibility_rejects_linear_profile():
    th = np.array([0.01, 0.1, 0.5, 1.0])
    curve = VTypeCurve("sampled", samples_theta=tuple(np.r_[th, -th]), samples_r=tuple(np.tile(1 + th, 2)))
    with pytest.raises(AdmissibilityError):
        vtype_admissibility(curve)


def test_mu_scalar_zero():
    assert mu_dlp(np.zeros((1, 1)), 1.3, 0.7)[0, 0] == pytest.approx(1 / math.pi, rel=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-math.pi, math.pi), st.floats(1.01, 3.0))
def test_mu_self_adjoint(seed, theta, r):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    T *= 0.9 / spectral_radius(T)
    M = mu_dlp(T, r, theta)
    assert np.allclose(M, M.conj().T, atol=1e-12 * max(1.0, op_norm(M)))


def test_mu_integrates_to_two():
    T = ritt_test(5, 3.0)
    assert reproducing_residual(T, [1.0], 1.2, nodes=4096) <= 1e-10
    rng = np.random.default_rng(1)
    p = rng.standard_normal(6)
    assert reproducing_residual(T, p, 1.2, nodes=4096) <= 1e-9 * max(1.0, op_norm(T) ** 5)


def test_poisson_factorization():
    rng = np.random.default_rng(2)
    T = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    T *= 0.8 / op_norm(T)
    assert poisson_factorization_check(T, 1.5, 1.5 + 0.3j, 0.3) <= 1e-10
    assert poisson_factorization_check(np.array([[0.2]]), 1.5, 1.5 + 0.3j, 0.3) <= 1e-12
    with pytest.raises(InputError):
        poisson_factorization_check(T, 1.5, 1.5 + 0.2j, 0.3)
    with pytest.raises(InputError):
        poisson_factorization_check(T, 1.5, 1.5, 0.0)


def test_epsilon_profile():
    assert EPS(0.5) == pytest.approx(0.25)
    e = EpsilonProfile("log_inv_sqrt", eps0=1.0, nu0=0.5)
    assert e(math.exp(-4)) == pytest.approx(0.5)
    assert e(0.0) == 0.0
    t = EpsilonProfile("tabulated", table_x=(0.1, 1.0), table_eps=(0.1, 0.3))
    assert t(0.05) == pytest.approx(0.05) and t(0.55) == pytest.approx(0.2)
    with pytest.raises(InputError):
        EPS(2.0)
    with pytest.raises(InvariantViolation):
        EpsilonProfile("tabulated", table_x=(0.1, 1.0), table_eps=(0.3, 0.1))
    with pytest.raises(InvariantViolation):
        EpsilonProfile("log_inv_sqrt", eps0=1.0, nu0=1.0)


def test_circle_radius():
    assert circle_radius(CURVE, EPS, 1) == pytest.approx(1 + 0.5 * (1 - 1 / 1.5))
    assert circle_radius(CURVE, EPS, 3) - 1 == pytest.approx((circle_radius(CURVE, EPS, 1) - 1) / 4)
    with pytest.raises(InputError):
        circle_radius(CURVE, EPS, 0)
    with pytest.raises(PreconditionError):
        circle_radius(CURVE, EpsilonProfile("power", nu0=0.5), 1)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_solve_angles_symmetric_roots(n):
    r_n = circle_radius(CURVE, EPS, n)
    a, b = solve_angles(CURVE, EPS, r_n)
    assert 0 < a < 1 and b == pytest.approx(-a, abs=1e-11)
    assert abs(_G(CURVE, EPS, r_n, a)) <= 1e-10
    assert case_of(a + 1e-3, a, b) == case_of(b - 1e-3, a, b) == "one"
    assert case_of(a / 2, a, b) == "three" and case_of(b / 2, a, b) == "two"
    with pytest.raises(PreconditionError):
        solve_angles(CURVE, EPS, 1.0)


def test_ritt_test_matrix():
    T = ritt_test(6, 10.0)
    ev = np.sort(np.linalg.eigvals(T).real)
    assert np.allclose(ev, np.arange(1, 7) / 6, atol=1e-10)
    with pytest.raises(InputError):
        ritt_test(1, 2.0)


def test_certificate_for_normal_operator():
    T = ritt_test(8, 1.0)
    cert = k_spectral_estimate(T, CURVE, EPS, (1, 2), grid_size=512)
    assert not cert.warnings
    for row in cert.per_n:
        assert row["psd_ok"] and row["K_n"] >= 3 and row["max_residual"] <= 1e-9
    for row in cert.per_n:
        assert verify_k_spectral(T, row["K_n"], row["r_n"], trials=50) <= 1 + 1e-6
    assert cert.trend in ("nondecreasing", "nonincreasing", "mixed")


def test_decompose_csv_and_precondition():
    dec = decompose(ritt_test(4, 1.0), CURVE, EPS, 1, grid_size=256)
    lines = dec.to_csv().splitlines()
    assert lines[0] == "theta,case,Rn,psd_margin,D_norm"
    assert len(lines) == dec.theta_grid.size + 1
    assert sum(dec.weights) == pytest.approx(2 * math.pi, rel=1e-12)
    with pytest.raises(PreconditionError):
        decompose(np.diag([1.0, -1.0]), CURVE, EPS, 1)


def test_verify_k_spectral():
    T = np.diag([0.5, 0.2])
    assert verify_k_spectral(np.eye(2), 1.0, 1.0, trials=5, max_degree=0) == pytest.approx(1.0)
    assert verify_k_spectral(T, 5.0, 1.1, trials=30) <= 1.0
    with pytest.raises(ClaimViolation):
        verify_k_spectral(np.array([[0.0, 50.0], [0.0, 0.0]]), 1.0, 1.0, trials=30)


def test_hypothesis_integral():
    zero = EpsilonProfile("power", eps0=0.0)
    assert hypothesis_integral(np.diag([0.5]), CURVE, zero)["value"] == 0.0
    out = hypothesis_integral(np.diag([0.5, 0.1]), CURVE, EPS)
    assert out["converged"] and not out["peripheral_eigenvalue"] and out["value"] > 0


def test_ritt_resolvent_check():
    assert ritt_resolvent_check(np.zeros((2, 2))) == pytest.approx(math.pi, rel=1e-12)
    # normal with spectrum {1/5, ..., 1}: the sup is attained at theta = pi against lambda = 1/5
    assert ritt_resolvent_check(ritt_test(5, 1.0)) == pytest.approx(math.pi / 1.2, rel=1e-10)
