"""Dense linear-algebra helpers shared by every other module.

Matrices are plain numpy arrays.  Real input stays real; nothing here knows
about shifts, curves or constants.
"""

from __future__ import annotations

import json
import warnings

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .errors import InputError, SingularityError

DENSE_SVD_MAX = 512
PIVOT_FLOOR = 1e-300
CIRCLE_SAMPLES = 8192


def as_matrix(A, *, square: bool = False) -> np.ndarray:
    """Validate and return a 2-D float or complex array (no copy if possible)."""
    M = np.asarray(A)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] == 0 or M.shape[1] == 0:
        raise InputError(f"expected a nonempty 2-D matrix, got shape {M.shape}")
    if not (np.issubdtype(M.dtype, np.floating) or np.issubdtype(M.dtype, np.complexfloating)):
        M = M.astype(np.complex128 if np.iscomplexobj(M) else np.float64)
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    if square and M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    return M


def _power_iteration_norm(A: np.ndarray, tol: float = 1e-12, maxiter: int = 5000) -> float | None:
    rng = np.random.default_rng(0)
    x = rng.standard_normal(A.shape[1])
    if np.iscomplexobj(A):
        x = x + 1j * rng.standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    AH = A.conj().T
    prev = 0.0
    for _ in range(maxiter):
        y = AH @ (A @ x)
        lam = np.linalg.norm(y)
        if lam == 0.0:
            return 0.0
        x = y / lam
        if abs(lam - prev) <= tol * lam:
            return float(np.sqrt(lam))
        prev = lam
    return None


def op_norm(A) -> float:
    """Largest singular value.

    Full SVD up to DENSE_SVD_MAX rows/cols, power iteration on A*A above that
    (with an SVD fallback when the iteration has not stagnated).
    """
    A = as_matrix(A)
    if max(A.shape) <= DENSE_SVD_MAX:
        return float(sla.svdvals(A, check_finite=False)[0])
    est = _power_iteration_norm(A)
    if est is None:
        return float(sla.svdvals(A, check_finite=False)[0])
    return est


def spectral_radius(A) -> float:
    A = as_matrix(A, square=True)
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _shifted(A: np.ndarray, z: complex) -> np.ndarray:
    z = complex(z)
    if z.imag == 0 and not np.iscomplexobj(A):
        M = -A.astype(np.float64)
        M[np.diag_indices(A.shape[0])] += z.real
    else:
        M = -A.astype(np.complex128)
        M[np.diag_indices(A.shape[0])] += z
    return M


def _lu_shifted(A: np.ndarray, z: complex):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(_shifted(A, z), check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_FLOOR:
        raise SingularityError(f"zI - A is singular at z={z!r}", z=complex(z))
    return lu, piv


def resolvent(A, z: complex) -> np.ndarray:
    """(zI - A)^{-1} by LU factorization."""
    A = as_matrix(A, square=True)
    lu, piv = _lu_shifted(A, z)
    eye = np.eye(A.shape[0], dtype=lu.dtype)
    return sla.lu_solve((lu, piv), eye, check_finite=False)


def resolvent_solve(A, z: complex, B) -> np.ndarray:
    """(zI - A)^{-1} B without forming the inverse."""
    A = as_matrix(A, square=True)
    lu, piv = _lu_shifted(A, z)
    return sla.lu_solve((lu, piv), np.asarray(B, dtype=np.result_type(lu.dtype, np.asarray(B).dtype)),
                        check_finite=False)


def resolvent_norm(A, z: complex) -> float:
    """‖(zI - A)^{-1}‖ as 1/σ_min(zI - A)."""
    A = as_matrix(A, square=True)
    smin = sla.svdvals(_shifted(A, z), check_finite=False)[-1]
    if smin < PIVOT_FLOOR:
        raise SingularityError(f"zI - A is singular at z={z!r}", z=complex(z))
    return float(1.0 / smin)


def min_eig_hermitian(H, rtol: float = 1e-10) -> float:
    H = as_matrix(H, square=True)
    scale = op_norm(H)
    skew = op_norm(H - H.conj().T)
    if skew > rtol * max(scale, np.finfo(float).tiny):
        raise InputError(f"matrix is not self-adjoint (skew part {skew:.3e}, norm {scale:.3e})")
    return float(sla.eigvalsh(0.5 * (H + H.conj().T), check_finite=False)[0])


def poly_eval(p, A) -> np.ndarray:
    """Horner evaluation of sum_k p[k] A^k."""
    coeffs = np.atleast_1d(np.asarray(p))
    if coeffs.size == 0:
        raise InputError("polynomial needs at least one coefficient")
    A = as_matrix(A, square=True)
    dtype = np.result_type(A.dtype, coeffs.dtype)
    n = A.shape[0]
    out = np.zeros((n, n), dtype=dtype)
    for a in coeffs[::-1]:
        out = out @ A
        out[np.diag_indices(n)] += a
    return out


def poly_values(p, z) -> np.ndarray:
    coeffs = np.atleast_1d(np.asarray(p))
    return np.polyval(coeffs[::-1], z)


def sup_on_circle(p, r: float) -> float:
    """max over |z| = r of |p(z)|: uniform sampling plus local golden-section refinement."""
    if not r > 0:
        raise InputError("radius must be positive")
    coeffs = np.atleast_1d(np.asarray(p, dtype=complex))
    if coeffs.size == 1:
        return float(abs(coeffs[0]))
    theta = np.linspace(-np.pi, np.pi, CIRCLE_SAMPLES, endpoint=False)
    vals = np.abs(poly_values(coeffs, r * np.exp(1j * theta)))
    best = float(vals.max())
    # local maxima on the periodic grid
    left = np.roll(vals, 1)
    right = np.roll(vals, -1)
    peaks = np.flatnonzero((vals >= left) & (vals >= right))
    peaks = peaks[np.argsort(vals[peaks])[::-1][:16]]
    h = 2 * np.pi / CIRCLE_SAMPLES

    def neg(t):
        return -abs(poly_values(coeffs, r * np.exp(1j * t)))

    for i in peaks:
        res = minimize_scalar(neg, bounds=(theta[i] - h, theta[i] + h), method="bounded",
                              options={"xatol": 1e-13})
        best = max(best, -float(res.fun))
    return best


def haar_unitary(n: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    """Random orthogonal/unitary matrix from the QR of a Gaussian matrix."""
    G = rng.standard_normal((n, n))
    if not real:
        G = G + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    d = np.diag(R)
    return Q * (d / np.abs(d))


# -- matrix files ------------------------------------------------------------

def matrix_to_dict(A) -> dict:
    A = as_matrix(A)
    flat = A.reshape(-1)
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "re": [float(v) for v in flat.real],
        "im": [float(v) for v in (flat.imag if np.iscomplexobj(flat) else np.zeros(flat.size))],
    }


def matrix_from_dict(d: dict) -> np.ndarray:
    try:
        rows, cols = int(d["rows"]), int(d["cols"])
        re = np.asarray(d["re"], dtype=np.float64)
        im = np.asarray(d.get("im", [0.0] * len(d["re"])), dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix record: {exc}") from exc
    if rows <= 0 or cols <= 0 or re.size != rows * cols or im.size != rows * cols:
        raise InputError("matrix record has inconsistent sizes")
    if np.any(im != 0) or np.any(np.signbit(im)):
        M = (re + 1j * im).reshape(rows, cols)
    else:
        M = re.reshape(rows, cols)
    return as_matrix(M)


def save_matrix(path, A) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_dict(A), fh)
        fh.write("\n")


def load_matrix(path) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrix file {path}: {exc}") from exc
    return matrix_from_dict(data)
