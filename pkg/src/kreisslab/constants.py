"""Numerical estimates of Kreiss-type constants of a matrix.

Every routine returns a ConstantEstimate whose ``lower`` value is attained by
the recorded witness, so it is a genuine lower bound for the constant.  An
``upper`` value is filled in only when some certificate is available; the
method is named in ``upper_method``.

Two exact reductions are used when they apply:

* entrywise nonnegative A: |p(A)| <= p(|A|) entrywise for power series with
  nonnegative coefficients, so resolvent (powers) and Cesaro sums attain their
  norm maxima at positive real z, resp. at lambda = 1;
* real A: conjugate points give equal norms, so only the upper half plane is
  searched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import minimize_scalar

from . import kernels
from .errors import InputError, PreconditionError
from .linalg import as_matrix, op_norm, resolvent_norm, spectral_radius

KINDS = ("kreiss", "uniform_kreiss", "strong_kreiss", "cesaro", "abs_cesaro", "power_bound")
SPECTRAL_SLACK = 1e-8
EXACT_LAMBDA_DIM = 64


@dataclass
class SearchOptions:
    seed: int = 0
    tol: float = 1e-10
    n_max: int = 4096
    angles: int = 512
    lambdas: int = 1024
    strong_angles: int = 64
    k_max: int | None = None
    random_starts: int = 8
    coordinate_starts: int = 4
    ascent_maxiter: int = 400
    certify: bool = False
    cert_tol: float = 1e-3
    cert_inner: float = 1e-6
    max_boxes: int = 200_000
    upper_dim_max: int = 512


@dataclass
class ConstantEstimate:
    kind: str
    lower: float
    witness: dict
    upper: float | None = None
    upper_method: str | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "lower": self.lower}
        if self.upper is not None:
            out["upper"] = self.upper
            out["upper_method"] = self.upper_method
        out["witness"] = self.witness
        out["meta"] = self.meta
        return out


def _opts(opts: SearchOptions | None) -> SearchOptions:
    return opts if opts is not None else SearchOptions()


def _cplx(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _meta(opts: SearchOptions, **extra) -> dict:
    meta = {"seed": opts.seed, "tol": opts.tol, "flags": []}
    meta.update(extra)
    return meta


def _is_nonnegative(A: np.ndarray) -> bool:
    return not np.iscomplexobj(A) and bool(np.all(A >= 0))


def _check_spectrum(A: np.ndarray) -> float:
    rho = spectral_radius(A)
    if rho > 1 + SPECTRAL_SLACK:
        raise PreconditionError(f"spectral radius {rho:.6g} exceeds 1")
    return rho


# -- Kreiss -------------------------------------------------------------------

def kreiss_value(A, z: complex) -> float:
    """(|z| - 1) ||(zI - A)^{-1}||."""
    return (abs(z) - 1.0) * resolvent_norm(A, z)


def _angle_grid(A: np.ndarray, count: int) -> tuple[np.ndarray, str]:
    if _is_nonnegative(A):
        return np.zeros(1), "nonnegative: positive real axis"
    if not np.iscomplexobj(A):
        return np.linspace(0.0, np.pi, count // 2 + 1), "real: upper half plane"
    return np.linspace(-np.pi, np.pi, count, endpoint=False), "full circle"


def _radius_exponents(normA: float) -> np.ndarray:
    ts = list(np.arange(-12.0, 0.5, 1.0))
    top = math.log10(normA + 1.0)
    if top > 0:
        ts += list(np.linspace(0.0, top, 5)[1:])
    return np.unique(np.asarray(ts))


def _golden_refine(f, x0: np.ndarray, steps: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                   tol: float, rounds: int = 30) -> tuple[float, np.ndarray]:
    """Coordinate-wise bounded golden-section ascent of f starting at x0."""
    x = np.array(x0, dtype=float)
    best = f(x)
    for _ in range(rounds):
        before = best
        for i in range(x.size):
            if steps[i] == 0:
                continue
            a = max(lo[i], x[i] - steps[i])
            b = min(hi[i], x[i] + steps[i])

            def g(t, i=i):
                y = x.copy()
                y[i] = t
                return -f(y)

            res = minimize_scalar(g, bounds=(a, b), method="bounded", options={"xatol": tol})
            if -res.fun > best:
                best = -float(res.fun)
                x[i] = float(res.x)
        if best - before <= tol * max(1.0, abs(best)):
            break
        steps = steps * 0.5
    return best, x


def _top_local_maxima(V: np.ndarray, count: int, wrap_cols: bool) -> list[tuple[int, int]]:
    pad = np.pad(V, 1, mode="constant", constant_values=-np.inf)
    if wrap_cols and V.shape[1] > 1:
        pad[1:-1, 0] = V[:, -1]
        pad[1:-1, -1] = V[:, 0]
    core = pad[1:-1, 1:-1]
    is_max = np.ones_like(V, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_max &= core >= pad[1 + di:pad.shape[0] - 1 + di, 1 + dj:pad.shape[1] - 1 + dj]
    idx = np.argwhere(is_max)
    order = np.argsort(V[is_max])[::-1]
    return [tuple(idx[k]) for k in order[:count]]


def kreiss_constant(A, opts: SearchOptions | None = None) -> ConstantEstimate:
    opts = _opts(opts)
    A = as_matrix(A, square=True)
    _check_spectrum(A)
    normA = op_norm(A)
    ts = _radius_exponents(normA)
    phis, reduction = _angle_grid(A, opts.angles)
    V = np.empty((ts.size, phis.size))
    for i, t in enumerate(ts):
        r = 1.0 + 10.0 ** t
        for j, ph in enumerate(phis):
            V[i, j] = kreiss_value(A, r * np.exp(1j * ph))
    i0, j0 = np.unravel_index(np.argmax(V), V.shape)
    best = float(V[i0, j0])
    wt, wphi = float(ts[i0]), float(phis[j0])

    dphi = (phis[1] - phis[0]) if phis.size > 1 else 0.0
    lo = np.array([-13.0, phis[0] if reduction != "full circle" else -np.inf])
    hi = np.array([ts[-1] + 1.0, phis[-1] if reduction != "full circle" else np.inf])

    def f(x):
        return kreiss_value(A, (1.0 + 10.0 ** x[0]) * np.exp(1j * x[1]))

    for (i, j) in _top_local_maxima(V, 6, reduction == "full circle"):
        val, x = _golden_refine(f, np.array([ts[i], phis[j]]), np.array([1.0, dphi]), lo, hi, opts.tol)
        if val > best:
            best, wt, wphi = val, float(x[0]), float(x[1])

    # far point: the objective tends to 1 at infinity
    r_far = 1.0 + 1e9 * (1.0 + normA)
    far = kreiss_value(A, r_far)
    z_best = (1.0 + 10.0 ** wt) * np.exp(1j * wphi)
    if far > best:
        best, z_best = far, complex(r_far)
    est = ConstantEstimate(
        kind="kreiss", lower=float(best), witness={"z": _cplx(complex(z_best))},
        meta=_meta(opts, radii=int(ts.size), angles=int(phis.size), reduction=reduction,
                   refinement="coordinate golden-section in (log10(|z|-1), arg z)",
                   far_radius=r_far))
    if opts.certify:
        _certify_kreiss(A, est, normA, opts)
    return est


def _certify_kreiss(A: np.ndarray, est: ConstantEstimate, normA: float, opts: SearchOptions) -> None:
    """Upper bound over 1 + cert_inner <= |z| by branch and bound.

    For |h| * ||R(z_c)|| < 1 the Neumann series gives
    ||R(z_c + h)|| <= ||R(z_c)|| / (1 - |h| ||R(z_c)||).
    """
    if normA <= 1.0 + 1e-14:
        est.upper, est.upper_method = 1.0, "contraction"
        est.meta["certified_domain"] = "all |z| > 1"
        return
    lower = est.lower
    # beyond r_out: ||R|| <= 1/(|z| - ||A||), so the objective is below (r-1)/(r-||A||)
    target = max(lower, 1.0 + 1e-12) * (1 + opts.cert_tol)
    r_out = max(normA + 2.0, (target * normA - 1.0) / (target - 1.0))
    outer = (r_out - 1.0) / (r_out - normA)
    phis_full = not np.iscomplexobj(A)
    ph_lo, ph_hi = (0.0, np.pi) if phis_full else (-np.pi, np.pi)
    if _is_nonnegative(A):
        ph_lo = ph_hi = 0.0
    r_in = 1.0 + opts.cert_inner
    boxes = [(r_in, r_out, ph_lo, ph_hi)]
    upper = outer
    n_boxes = 0
    slack_limit = opts.cert_tol * max(lower, 1.0)
    while boxes:
        r0, r1, p0, p1 = boxes.pop()
        n_boxes += 1
        if n_boxes > opts.max_boxes:
            est.meta["flags"].append("certification-box-limit")
            est.upper, est.upper_method = None, None
            return
        rc, pc = 0.5 * (r0 + r1), 0.5 * (p0 + p1)
        zc = rc * np.exp(1j * pc)
        Rn = resolvent_norm(A, zc)
        h = 0.5 * (r1 - r0) + r1 * 0.5 * (p1 - p0)
        if h * Rn < 0.5:
            ub = (r1 - 1.0) * Rn / (1.0 - h * Rn)
            val = (rc - 1.0) * Rn
            if val > lower:
                lower = val
            if ub - lower <= slack_limit or ub <= lower:
                upper = max(upper, ub)
                continue
        # split the longer side (in metric terms)
        if (r1 - r0) >= r1 * (p1 - p0):
            rm = math.sqrt(r0 * r1) if r0 > 0 else 0.5 * (r0 + r1)
            rm = min(max(rm, r0 + 0.25 * (r1 - r0)), r1 - 0.25 * (r1 - r0))
            boxes += [(r0, rm, p0, p1), (rm, r1, p0, p1)]
        else:
            boxes += [(r0, r1, p0, pc), (r0, r1, pc, p1)]
    est.upper, est.upper_method = float(max(upper, est.lower)), "branch-and-bound (Neumann perturbation)"
    est.meta["certified_domain"] = f"|z| >= {r_in!r}"
    est.meta["boxes"] = n_boxes


# -- powers --------------------------------------------------------------------

def _block_shift_size(A: np.ndarray) -> int | None:
    """Block size b if A is block superdiagonal (blocks only at (i, i+1)), else None."""
    d = A.shape[0]
    r, c = np.nonzero(A)
    b = 1
    while b < d:
        if d % b == 0 and np.all(c // b == r // b + 1):
            return b
        b *= 2
    return None


def _block_power_norms(A: np.ndarray, b: int, n_max: int) -> np.ndarray:
    """||A^n|| for n = 0..min(n_max, N-1) of a block-superdiagonal matrix.

    A^n has exactly one nonzero block per block row and column, so its norm is
    the largest norm among the products B_i B_{i+1} ... B_{i+n-1}.
    """
    N = A.shape[0] // b
    B = np.stack([A[i * b:(i + 1) * b, (i + 1) * b:(i + 2) * b] for i in range(N - 1)])
    top = min(n_max, N - 1)
    out = np.zeros(top + 1)
    out[0] = 1.0
    P = B.copy()
    for n in range(1, top + 1):
        if n > 1:
            P = np.matmul(P[:-1], B[n - 1:])
        out[n] = float(np.max(np.linalg.svd(P, compute_uv=False)[:, 0]))
    return out


def power_bound(A, opts: SearchOptions | None = None) -> ConstantEstimate:
    opts = _opts(opts)
    A = as_matrix(A, square=True)
    meta = _meta(opts, n_max=opts.n_max)
    b = _block_shift_size(A)
    if b is not None:
        norms = _block_power_norms(A, b, opts.n_max)
        meta["method"] = f"block-superdiagonal products (block size {b})"
        exhaustive = norms.size - 1 >= A.shape[0] // b - 1
    else:
        meta["method"] = "dense repeated multiplication"
        norms, exhaustive = [1.0], False
        P = np.eye(A.shape[0], dtype=A.dtype)
        for _ in range(opts.n_max):
            P = P @ A
            if not np.any(P):
                exhaustive = True
                break
            norms.append(op_norm(P))
            if norms[-1] < 1.0:
                # ||A^{qj+s}|| <= ||A^s|| once ||A^j|| < 1: nothing later can win
                exhaustive = True
                break
        norms = np.asarray(norms)
    n_star = int(np.argmax(norms))
    if not exhaustive:
        meta["flags"].append("truncated-sup")
    est = ConstantEstimate("power_bound", float(norms[n_star]), {"n": n_star}, meta=meta)
    if exhaustive:
        est.upper, est.upper_method = est.lower, "exhaustive"
    return est


def power_norm(A, n: int) -> float:
    """||A^n|| by repeated multiplication."""
    A = as_matrix(A, square=True)
    return op_norm(np.linalg.matrix_power(A, int(n)))


# -- Cesaro type sums ------------------------------------------------------------

def cesaro_value(A, n: int, lam: complex = 1.0) -> float:
    """||(1/(n+1)) sum_{k=0}^n lam^k A^k||."""
    A = as_matrix(A, square=True)
    S = np.zeros(A.shape, dtype=np.result_type(A.dtype, np.asarray(lam).dtype))
    P = np.eye(A.shape[0], dtype=S.dtype)
    for k in range(n + 1):
        S += P
        P = lam * (P @ A)
    return op_norm(S / (n + 1))


def _cesaro_scan(A: np.ndarray, opts: SearchOptions, lams: np.ndarray):
    """Maximize ||M_n(lam A)|| over n and the lam grid.

    Stops once (sum_k ||A^k||)/(n+1) is certifiably below the running maximum:
    for nilpotent A the sum is finite, otherwise it is bounded by
    (sum_{s<j} ||A^s||)/(1 - ||A^j||) as soon as some ||A^j|| < 1.
    Returns (best, n, lam, meta, upper).
    """
    meta = _meta(opts, lambdas=int(lams.size))
    if op_norm(A) <= 1.0:
        meta["stop"] = "||A|| <= 1: every average has norm <= 1 = ||M_0||"
        return 1.0, 0, 1.0 + 0j, meta, 1.0
    d = A.shape[0]
    cplx = np.iscomplexobj(A) or np.iscomplexobj(lams)
    S = np.zeros((lams.size, d, d), dtype=np.complex128 if cplx else np.float64)
    exact = d <= EXACT_LAMBDA_DIM or lams.size == 1
    best, best_n, best_lam = -1.0, 0, complex(lams[0])
    P = np.eye(d, dtype=A.dtype)
    partial, tail = 0.0, None
    reason = None
    for n in range(opts.n_max + 1):
        if n:
            P = P @ A
            if not np.any(P):
                reason = f"nilpotent (index {n})"
                break
            pn = op_norm(P)
            if tail is None and pn < 1.0:
                tail = partial / (1.0 - pn)
        else:
            pn = 1.0
        partial += pn
        S += (lams ** n)[:, None, None] * P[None, :, :]
        if exact:
            vals = np.linalg.svd(S, compute_uv=False)[:, 0] / (n + 1)
            i = int(np.argmax(vals))
            vmax = float(vals[i])
        else:
            frob = np.sqrt(np.sum(np.abs(S) ** 2, axis=(1, 2)))
            cand = {int(i): op_norm(S[i]) / (n + 1) for i in np.argsort(frob)[::-1][:8]}
            i = max(cand, key=cand.get)
            vmax = cand[i]
        if vmax > best:
            best, best_n, best_lam = vmax, n, complex(lams[i])
        if tail is not None and tail / (n + 2) < best:
            reason = "sum of power norms"
            break
    if reason is None:
        meta["flags"].append("truncated-sup")
    else:
        meta["stop"] = reason
    meta["n_stop"] = n
    return best, best_n, best_lam, meta, None


def cesaro_constant(A, opts: SearchOptions | None = None) -> ConstantEstimate:
    opts = _opts(opts)
    A = as_matrix(A, square=True)
    best, n, _, meta, upper = _cesaro_scan(A, opts, np.ones(1))
    est = ConstantEstimate("cesaro", float(best), {"n": int(n)}, meta=meta)
    if upper is not None:
        est.upper, est.upper_method = upper, "contraction"
    return est


def uniform_kreiss_constant(A, opts: SearchOptions | None = None) -> ConstantEstimate:
    opts = _opts(opts)
    A = as_matrix(A, square=True)
    _check_spectrum(A)
    if _is_nonnegative(A):
        lams, reduction = np.ones(1), "nonnegative: lambda = 1"
    elif not np.iscomplexobj(A):
        lams, reduction = np.exp(1j * np.linspace(0, np.pi, opts.lambdas // 2 + 1)), "real: upper half circle"
    else:
        lams, reduction = np.exp(1j * np.linspace(-np.pi, np.pi, opts.lambdas, endpoint=False)), "full circle"
    best, n, lam, meta, upper = _cesaro_scan(A, opts, lams)
    if lams.size > 1 and n > 0:
        step = 2 * np.pi / opts.lambdas

        def f(x):
            return cesaro_value(A, n, np.exp(1j * x[0]))

        val, x = _golden_refine(f, np.array([np.angle(lam)]), np.array([step]),
                                np.array([-np.inf]), np.array([np.inf]), opts.tol)
        if val > best:
            best, lam = val, complex(np.exp(1j * x[0]))
    meta["reduction"] = reduction
    meta["note"] = ("reported in the averaged form sup ||M_n(lambda A)||; the partial-sum "
                    "resolvent form differs by an absolute factor and is not computed here")
    est = ConstantEstimate("uniform_kreiss", float(best), {"n": int(n), "lambda": _cplx(lam)}, meta=meta)
    if upper is not None:
        est.upper, est.upper_method = upper, "contraction"
    return est


def partial_sum_kreiss_value(A, z: complex, n_max: int = 4096) -> float:
    """(|z|-1) sup_n ||sum_{k<=n} A^k / z^{k+1}||, the n = infinity term included."""
    A = as_matrix(A, square=True)
    d = A.shape[0]
    S = np.zeros((d, d), dtype=complex)
    P = np.eye(d, dtype=complex) / z
    best = 0.0
    for _ in range(n_max + 1):
        S += P
        best = max(best, op_norm(S))
        P = (P @ A) / z
        if not np.any(P):
            break
    best = max(best, resolvent_norm(A, z))
    return (abs(z) - 1.0) * best


# -- strong Kreiss -----------------------------------------------------------------

def strong_kreiss_value(A, z: complex, k: int) -> float:
    """(|z|-1)^k ||(zI - A)^{-k}||."""
    A = as_matrix(A, square=True)
    d = A.shape[0]
    r = abs(z)
    zz = z.real if (np.isreal(z) and not np.iscomplexobj(A)) else z
    M = zz * np.eye(d) - A
    Y = sla.solve(M, (r - 1.0) * np.eye(d))
    P = Y
    for _ in range(k - 1):
        P = P @ Y
    return op_norm(P)


def _strong_profile(A: np.ndarray, z: complex, k_max: int) -> tuple[float, int]:
    d = A.shape[0]
    r = abs(z)
    zz = z.real if (np.isreal(z) and not np.iscomplexobj(A)) else z
    Y = sla.solve(zz * np.eye(d) - A, (r - 1.0) * np.eye(d))
    P = Y
    frob = np.empty(k_max)
    for k in range(k_max):
        if k:
            P = P @ Y
        frob[k] = np.linalg.norm(P)
        if not np.isfinite(frob[k]) or frob[k] == 0.0:
            frob[k + 1:] = 0.0
            break
    # exact norms at the few k with the largest Frobenius norm (which bounds the 2-norm)
    cands = np.argsort(frob)[::-1][:4]
    best, best_k = -1.0, 1
    for kk in sorted(int(c) for c in cands):
        v = strong_kreiss_value(A, z, kk + 1)
        if v > best:
            best, best_k = v, kk + 1
    return best, best_k


def strong_kreiss_constant(A, opts: SearchOptions | None = None) -> ConstantEstimate:
    opts = _opts(opts)
    A = as_matrix(A, square=True)
    _check_spectrum(A)
    d = A.shape[0]
    k_max = opts.k_max or 4 * d
    normA = op_norm(A)
    ts = _radius_exponents(normA)
    phis, reduction = _angle_grid(A, opts.strong_angles)
    V = np.empty((ts.size, phis.size))
    K = np.empty((ts.size, phis.size), dtype=int)
    for i, t in enumerate(ts):
        for j, ph in enumerate(phis):
            V[i, j], K[i, j] = _strong_profile(A, (1 + 10.0 ** t) * np.exp(1j * ph), k_max)
    i0, j0 = np.unravel_index(np.argmax(V), V.shape)
    best, bk = float(V[i0, j0]), int(K[i0, j0])
    bz = (1 + 10.0 ** ts[i0]) * np.exp(1j * phis[j0])
    dphi = (phis[1] - phis[0]) if phis.size > 1 else 0.0
    lo = np.array([-13.0, -np.inf])
    hi = np.array([ts[-1] + 1.0, np.inf])
    for (i, j) in _top_local_maxima(V, 3, reduction == "full circle"):
        kk = int(K[i, j])

        def f(x, kk=kk):
            return strong_kreiss_value(A, (1 + 10.0 ** x[0]) * np.exp(1j * x[1]), kk)

        val, x = _golden_refine(f, np.array([ts[i], phis[j]]), np.array([1.0, dphi]), lo, hi, opts.tol)
        if val > best:
            best, bk, bz = val, kk, (1 + 10.0 ** x[0]) * np.exp(1j * x[1])
    r_far = 1.0 + 1e9 * (1.0 + normA)
    far = strong_kreiss_value(A, r_far, 1)
    if far > best:
        best, bk, bz = far, 1, complex(r_far)
    meta = _meta(opts, radii=int(ts.size), angles=int(phis.size), k_max=k_max, reduction=reduction,
                 k_at_max=bk)
    est = ConstantEstimate("strong_kreiss", float(best), {"z": _cplx(complex(bz)), "k": bk}, meta=meta)
    if normA <= 1.0 + 1e-14:
        est.upper, est.upper_method = 1.0, "contraction"
    return est


# -- absolute Cesaro ---------------------------------------------------------------

def abs_cesaro_value(A, x, n: int) -> float:
    """(1/n) sum_{j=1}^n ||A^j x|| for a unit vector x (normalized here)."""
    A = as_matrix(A, square=True)
    x = np.asarray(x)
    x = x / np.linalg.norm(x)
    total = 0.0
    v = x
    for _ in range(n):
        v = A @ v
        total += np.linalg.norm(v)
    return float(total / n)


def _ascend(Acsr, AHcsr, x: np.ndarray, n: int, tol: float, maxiter: int) -> tuple[float, np.ndarray]:
    x = x / np.linalg.norm(x)
    best_val, best_x = -1.0, x
    for _ in range(maxiter):
        val, y = kernels.abs_cesaro_step(Acsr, AHcsr, x, n)
        val = float(val)
        if val > best_val:
            if val - best_val <= tol * val:
                best_val, best_x = val, x
                break
            best_val, best_x = val, x
        else:
            break
        ny = np.linalg.norm(y)
        if ny == 0.0:
            break
        x = y / ny
    return best_val, best_x


def abs_cesaro_constant(A, opts: SearchOptions | None = None) -> ConstantEstimate:
    """Sphere ascent on f_n(x) = (1/n) sum_{j<=n} ||A^j x|| over candidate n.

    Candidate n and start vectors are screened by the column norms of the
    powers (f_n at coordinate vectors) and by random starts; a warm-started
    sweep over every n follows.  All values are attained at explicit unit
    vectors.  The upper bound is the Cauchy-Schwarz certificate
    sqrt(lambda_max(sum_j A^{*j} A^j) / n), computed when dim <= upper_dim_max.
    """
    opts = _opts(opts)
    A = as_matrix(A, square=True)
    d = A.shape[0]
    rng = np.random.default_rng(opts.seed)
    Acsr = sp.csr_matrix(A)
    AHcsr = sp.csr_matrix(A.conj().T)
    meta = _meta(opts, random_starts=opts.random_starts, coordinate_starts=opts.coordinate_starts)

    # powers (sparse), their column norms and, for moderate size, Gram sums
    dense_ok = d <= opts.upper_dim_max
    normA = op_norm(A) if dense_ok else None
    colnorms, cs_bounds = [], []
    gram = np.zeros((d, d), dtype=A.dtype) if dense_ok else None
    P = Acsr.copy()
    nil = None
    stop = None
    partial = 0.0
    tail = None
    screen_best = 0.0
    for j in range(1, opts.n_max + 1):
        P.eliminate_zeros()
        if P.nnz == 0:
            nil = j
            break
        cn = np.sqrt(np.asarray(abs(P.multiply(P.conj())).sum(axis=0)).ravel())
        colnorms.append(cn)
        k = len(colnorms)
        running = np.sum(colnorms, axis=0) / k
        screen_best = max(screen_best, float(running.max()))
        if dense_ok:
            Pd = P.toarray()
            pn = op_norm(Pd)
            gram += Pd.conj().T @ Pd
            lam = sla.eigvalsh(gram, subset_by_index=[d - 1, d - 1])[0]
            cs_bounds.append(math.sqrt(max(lam, 0.0) / j))
            if tail is None and pn < 1.0:
                # sum_{i>=1} ||A^i|| <= (sum_{s<=j} ||A^s||) / (1 - ||A^j||)
                tail = (partial + pn) / (1.0 - pn)
            partial += pn
            if normA <= 1.0 and screen_best >= normA:
                stop = ("||A|| <= 1 bounds every average by ||A||", normA)
                break
            if tail is not None and tail / (j + 1) < screen_best:
                stop = ("sum of power norms", None)
                break
        P = (P @ Acsr).tocsr()
    n_top = len(colnorms)
    if n_top == 0:
        est = ConstantEstimate("abs_cesaro", 0.0, {"n": 1, "x": [1.0] + [0.0] * (d - 1)}, 0.0,
                               "zero operator", meta)
        return est
    C = np.cumsum(np.asarray(colnorms), axis=0) / np.arange(1, n_top + 1)[:, None]

    # random starts: f_n(x) for all n at once
    rand = []
    for _ in range(opts.random_starts):
        x = rng.standard_normal(d)
        if np.iscomplexobj(A):
            x = x + 1j * rng.standard_normal(d)
        x /= np.linalg.norm(x)
        v, norms = x, []
        for _j in range(n_top):
            v = Acsr @ v
            norms.append(np.linalg.norm(v))
        rand.append((x, np.cumsum(norms) / np.arange(1, n_top + 1)))

    best, best_n, best_x = -1.0, 1, None
    screen = C.max(axis=1)
    top_ns = set(int(i) + 1 for i in np.argsort(screen)[::-1][:6])
    k = 1
    while k <= n_top:
        top_ns.add(k)
        k *= 2
    top_ns.add(n_top)
    for n in sorted(top_ns):
        starts = [np.eye(1, d, int(i)).ravel().astype(A.dtype) for i in np.argsort(C[n - 1])[::-1][:opts.coordinate_starts]]
        starts += [x for x, prof in sorted(rand, key=lambda t: -t[1][n - 1])[:2]]
        if best_x is not None:
            starts.append(best_x)
        for x0 in starts:
            val, x = _ascend(Acsr, AHcsr, x0, n, opts.tol, opts.ascent_maxiter)
            if val > best:
                best, best_n, best_x = val, n, x
    # warm-started sweep over all n
    x = best_x
    for n in range(1, n_top + 1):
        val, x = _ascend(Acsr, AHcsr, x, n, opts.tol, 25)
        if val > best:
            best, best_n, best_x = val, n, x
    # polish the winner
    val, x = _ascend(Acsr, AHcsr, best_x, best_n, opts.tol, opts.ascent_maxiter)
    if val > best:
        best, best_x = val, x
    # re-evaluate on the returned vector so the witness reproduces exactly
    best = abs_cesaro_value(A, best_x, best_n)
    meta["n_range"] = n_top
    est = ConstantEstimate("abs_cesaro", float(best),
                           {"n": int(best_n), "x": _vec_to_list(best_x)}, meta=meta)
    if nil is not None:
        meta["nilpotent_index"] = nil
    elif stop is not None:
        meta["stop"] = stop[0]
    else:
        meta["flags"].append("truncated-sup")
    if stop is not None and stop[1] is not None:
        est.upper, est.upper_method = float(max(stop[1], best)), "contraction"
    elif cs_bounds and (nil is not None or stop is not None):
        est.upper, est.upper_method = float(max(max(cs_bounds), best)), "Cauchy-Schwarz"
    return est


def _vec_to_list(x: np.ndarray):
    if np.iscomplexobj(x):
        return {"re": [float(v) for v in x.real], "im": [float(v) for v in x.imag]}
    return [float(v) for v in x]


def vec_from_witness(w) -> np.ndarray:
    if isinstance(w, dict):
        return np.asarray(w["re"]) + 1j * np.asarray(w["im"])
    return np.asarray(w, dtype=float)


# -- dispatch -------------------------------------------------------------------------

ESTIMATORS = {
    "kreiss": kreiss_constant,
    "uniform_kreiss": uniform_kreiss_constant,
    "strong_kreiss": strong_kreiss_constant,
    "cesaro": cesaro_constant,
    "abs_cesaro": abs_cesaro_constant,
    "power_bound": power_bound,
}


def estimate(kind: str, A, opts: SearchOptions | None = None) -> ConstantEstimate:
    try:
        fn = ESTIMATORS[kind]
    except KeyError:
        raise InputError(f"unknown constant kind {kind!r}; expected one of {KINDS}") from None
    return fn(A, opts)


def reevaluate_witness(A, est: ConstantEstimate) -> float:
    """Recompute the objective at the stored witness."""
    w = est.witness
    if est.kind == "kreiss":
        return kreiss_value(A, complex(w["z"]["re"], w["z"]["im"]))
    if est.kind == "strong_kreiss":
        return strong_kreiss_value(A, complex(w["z"]["re"], w["z"]["im"]), int(w["k"]))
    if est.kind == "uniform_kreiss":
        return cesaro_value(A, int(w["n"]), complex(w["lambda"]["re"], w["lambda"]["im"]))
    if est.kind == "cesaro":
        return cesaro_value(A, int(w["n"]))
    if est.kind == "abs_cesaro":
        return abs_cesaro_value(A, vec_from_witness(w["x"]), int(w["n"]))
    if est.kind == "power_bound":
        return power_norm(A, int(w["n"]))
    raise InputError(f"unknown kind {est.kind!r}")
