from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kreisslab.constants import (KINDS, SearchOptions, abs_cesaro_constant, cesaro_constant,
                                 cesaro_value, estimate, kreiss_constant, partial_sum_kreiss_value,
                                 power_bound, reevaluate_witness, strong_kreiss_constant,
                                 uniform_kreiss_constant)
from kreisslab.constructions import (ShiftFamilySpec, TruncationSpec, build_direct_sum,
                                     build_muller_shift, build_plain_shift, build_truncated_shift)
from kreisslab.errors import InputError, PreconditionError
from kreisslab.linalg import op_norm

FAST = SearchOptions(angles=64, lambdas=128, random_starts=2, coordinate_starts=2)


def _contraction(n, seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return G / op_norm(G)


def test_kreiss_zero_and_shift():
    assert kreiss_constant(np.zeros((3, 3))).lower == pytest.approx(1.0, abs=1e-8)
    est = kreiss_constant(build_plain_shift(8))
    assert est.lower == pytest.approx(1.0, abs=1e-6)


def test_kreiss_nilpotent_2x2_oracle():
    # closed form: sup_r (r-1) smax([[1/r, b/r^2],[0,1/r]]) by a dense radial grid
    b = 8.0
    r = 1.0 + np.geomspace(1e-9, 1e3, 10 ** 6)
    a, q = 1 / r, b / r ** 2
    tr = 2 * a * a + q * q
    smax = np.sqrt(0.5 * (tr + np.sqrt(tr * tr - 4 * a ** 4)))
    oracle = float(np.max((r - 1) * smax))
    assert kreiss_constant(np.array([[0, b], [0, 0]])).lower == pytest.approx(oracle, rel=1e-4)


def test_kreiss_precondition():
    with pytest.raises(PreconditionError):
        kreiss_constant(np.diag([1.1, 0.0]))


def test_kreiss_certified_upper():
    A = np.array([[0.0, 3.0], [0.0, 0.2]])
    opts = SearchOptions(certify=True)
    est = kreiss_constant(A, opts)
    assert est.upper is not None and est.lower <= est.upper
    assert est.upper <= est.lower * (1 + 2 * opts.cert_tol)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_contractions_kreiss_one(seed):
    A = _contraction(6 + seed, seed)
    assert kreiss_constant(A).lower == pytest.approx(1.0, abs=1e-4)
    assert strong_kreiss_constant(A, FAST).lower <= 1 + 1e-6


def test_uniform_kreiss_examples():
    assert uniform_kreiss_constant(build_plain_shift(10), FAST).lower == pytest.approx(1.0, abs=1e-6)
    assert uniform_kreiss_constant(np.eye(3), FAST).lower == pytest.approx(1.0, abs=1e-12)


def test_strong_kreiss_examples():
    assert strong_kreiss_constant(np.zeros((2, 2)), FAST).lower == pytest.approx(1.0, abs=1e-6)
    c = 0.05
    X = build_truncated_shift(ShiftFamilySpec("strong_kreiss_telescoping", 1, c), TruncationSpec(32))
    assert strong_kreiss_constant(X, FAST).lower <= 1 + 10 * c


def test_cesaro_examples():
    assert cesaro_constant(np.eye(4)).lower == pytest.approx(1.0)
    assert cesaro_constant(build_plain_shift(9)).lower == pytest.approx(1.0, abs=1e-8)
    A = np.array([[-1.0]])
    scan = max(abs(sum((-1) ** k for k in range(n + 1))) / (n + 1) for n in range(1001))
    assert cesaro_constant(A).lower == pytest.approx(scan, abs=1e-12)


def test_abs_cesaro_examples():
    est = abs_cesaro_constant(np.eye(3), FAST)
    assert est.lower == pytest.approx(1.0, abs=1e-10)
    assert est.upper == pytest.approx(1.0, abs=1e-10)
    assert abs_cesaro_constant(build_plain_shift(12), FAST).lower == pytest.approx(1.0, abs=1e-10)
    T = build_muller_shift(64, 0.25)
    est = abs_cesaro_constant(T, FAST)
    assert est.lower <= math.sqrt(6)
    assert est.upper is None or est.lower <= est.upper * (1 + 1e-12)


def test_power_bound_examples():
    assert power_bound(build_plain_shift(6)).lower == pytest.approx(1.0)
    c, N = 0.1, 128
    est = power_bound(build_truncated_shift(ShiftFamilySpec("cesaro", 1, c), TruncationSpec(N)))
    assert est.lower >= c * math.log(N)
    assert est.witness["n"] == N - 1
    assert est.upper == est.lower
    T = build_muller_shift(32, 0.3)
    assert power_bound(T).lower == pytest.approx(32 ** 0.3, rel=1e-12)


def test_power_bound_dense_path():
    A = np.array([[0.5, 2.0], [0.0, 0.5]])
    norms = [op_norm(np.linalg.matrix_power(A, n)) for n in range(200)]
    assert power_bound(A).lower == pytest.approx(max(norms), rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0, 2 * math.pi))
def test_power_bound_rotation_invariant(seed, phi):
    A = _contraction(4, seed) * 1.3
    A = A / max(np.abs(np.linalg.eigvals(A)).max() * 1.01, 1.0)
    assert power_bound(np.exp(1j * phi) * A).lower == pytest.approx(power_bound(A).lower, rel=1e-10)


@pytest.mark.parametrize("kind", KINDS)
def test_witness_reproduces(kind):
    X = build_truncated_shift(ShiftFamilySpec("cesaro", 1, 0.2), TruncationSpec(10))
    est = estimate(kind, X, FAST)
    assert reevaluate_witness(X, est) == pytest.approx(est.lower, rel=1e-8)
    if est.upper is not None:
        assert est.lower <= est.upper * (1 + 1e-12)


def test_estimate_unknown_kind():
    with pytest.raises(InputError):
        estimate("nope", np.eye(2))


def test_kreiss_le_uniform():
    X = build_truncated_shift(ShiftFamilySpec("cesaro", 1, 0.3), TruncationSpec(12))
    k = kreiss_constant(X, FAST)
    u = uniform_kreiss_constant(X, FAST)
    assert k.lower <= u.lower * (1 + 1e-6)
    z = complex(k.witness["z"]["re"], k.witness["z"]["im"])
    assert k.lower <= partial_sum_kreiss_value(X, z) * (1 + 1e-8)


@pytest.mark.parametrize("kind", ["kreiss", "uniform_kreiss", "cesaro", "power_bound"])
def test_direct_sum_law(kind):
    blocks = [build_truncated_shift(ShiftFamilySpec("cesaro", 1, 0.4), TruncationSpec(6)),
              build_muller_shift(7, 0.3)]
    D = build_direct_sum(blocks)
    per = max(estimate(kind, b, FAST).lower for b in blocks)
    assert estimate(kind, D, FAST).lower == pytest.approx(per, rel=1e-8)


def test_direct_sum_abs_cesaro_at_least_blocks():
    blocks = [build_truncated_shift(ShiftFamilySpec("cesaro", 1, 0.4), TruncationSpec(6)),
              build_muller_shift(7, 0.3)]
    D = build_direct_sum(blocks)
    per = max(abs_cesaro_constant(b, FAST).lower for b in blocks)
    assert abs_cesaro_constant(D, FAST).lower >= per * (1 - 1e-8)


def test_fuller_bound_small():
    from kreisslab.bounds import c_of_eps
    for m, eps in ((1, 1.0), (2, 0.25)):
        X = build_truncated_shift(ShiftFamilySpec("cesaro", m, c_of_eps(eps, m)), TruncationSpec(32))
        est = abs_cesaro_constant(X, FAST)
        assert est.lower <= 1 + eps + 1e-6


def test_cesaro_value_formula():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert cesaro_value(A, 1) == pytest.approx(op_norm((np.eye(2) + A) / 2))
    lam = np.exp(0.4j)
    assert cesaro_value(A, 1, lam) == pytest.approx(op_norm((np.eye(2) + lam * A) / 2))


def test_to_dict_shape():
    d = kreiss_constant(np.zeros((2, 2))).to_dict()
    assert {"kind", "lower", "witness", "meta"} <= set(d)
