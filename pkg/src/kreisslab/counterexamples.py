"""Finite truncations of two counterexample families.

* the resolvent family: direct sums of X_{1,N}(c_N) satisfy a near-optimal
  resolvent estimate while their powers grow like c_N log N;
* a Foguel-Hankel operator built from a Hankel matrix of matrix units whose
  powers stay below 1 + sqrt(beta_n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .constructions import B_table, ShiftFamilySpec, TruncationSpec, build_truncated_shift, weight_product
from .errors import InputError, InvariantViolation, RangeError
from .linalg import op_norm, resolvent_norm

PREFIX = 4096


# ---------------------------------------------------------------------------
# sequences

@dataclass(frozen=True)
class BetaSequence:
    """beta_n for n >= 1: 1/log(n+1), or a table (beta_1, beta_2, ...)."""

    generator: str = "inv_log"
    length: int = 1 << 20
    table: tuple = ()

    def __post_init__(self):
        if self.generator == "tabulated":
            object.__setattr__(self, "length", len(self.table))
        elif self.generator != "inv_log":
            raise InvariantViolation(f"unknown beta generator {self.generator!r}")
        if self.length < 3:
            raise InvariantViolation("need at least three terms")
        n = np.arange(1, min(self.length, PREFIX) + 1)
        b = self.values(n)
        if np.any(b <= 0):
            raise InvariantViolation("beta_n must be positive")
        if np.any(np.diff(b / n.astype(float) ** 2) > 0):
            raise InvariantViolation("n^-2 beta_n must be nonincreasing")
        if self.generator == "tabulated" and not b[-1] < b[0]:
            raise InvariantViolation("beta_n shows no decay on the table")

    def values(self, n) -> np.ndarray:
        n = np.asarray(n)
        if np.any(n < 1) or np.any(n > self.length):
            raise InputError(f"beta index out of range 1..{self.length}")
        if self.generator == "inv_log":
            return 1.0 / np.log1p(n.astype(float))
        return np.asarray(self.table, dtype=float)[n - 1]


@dataclass(frozen=True)
class CNSequence:
    """c_N for N >= N0: 1/sqrt(log N), or a table (c_{N0}, c_{N0+1}, ...); zero beyond a table."""

    generator: str = "inv_sqrt_log"
    N0: int = 2
    table: tuple = ()

    def __post_init__(self):
        if self.N0 < 2:
            raise InvariantViolation("N0 must be at least 2")
        if self.generator not in ("inv_sqrt_log", "tabulated"):
            raise InvariantViolation(f"unknown c_N generator {self.generator!r}")
        N = np.arange(self.N0, self.N0 + (len(self.table) if self.generator == "tabulated" else PREFIX))
        c = self.values(N)
        if np.any(c <= 0) or np.any(np.diff(c) > 0):
            raise InvariantViolation("c_N must be positive and nonincreasing")
        if self.generator == "inv_sqrt_log" and np.any(np.diff(c * np.log(N)) <= 0):
            raise InvariantViolation("c_N log N must increase")

    def values(self, N) -> np.ndarray:
        N = np.asarray(N)
        if np.any(N < self.N0):
            raise InputError(f"c_N defined for N >= {self.N0}")
        if self.generator == "inv_sqrt_log":
            return 1.0 / np.sqrt(np.log(N.astype(float)))
        tab = np.asarray(self.table, dtype=float)
        idx = N - self.N0
        out = np.zeros(N.shape)
        inside = idx < tab.size
        out[inside] = tab[idx[inside]]
        return out

    def first_admissible(self, L: float) -> int:
        """Smallest N >= N0 with c_N L < 1."""
        if self.generator == "inv_sqrt_log":
            return max(self.N0, int(math.floor(math.exp(L * L))) + 1)
        tab = np.asarray(self.table) * L
        hit = np.flatnonzero(tab < 1)
        return self.N0 + int(hit[0]) if hit.size else self.N0 + tab.size


# ---------------------------------------------------------------------------
# resolvent family

def make_z_grid(n_radii: int = 64, n_angles: int = 64, r_min: float = 1e-3, r_max: float = 10.0) -> np.ndarray:
    """|z| = 1 + logspace(r_min, r_max), arguments in [0, pi] (real matrices are conjugation symmetric)."""
    rad = 1.0 + np.geomspace(r_min, r_max, n_radii)
    ang = np.linspace(0.0, math.pi, n_angles)
    return (rad[:, None] * np.exp(1j * ang)[None, :]).ravel()


def _W_generating_norms(spec: ShiftFamilySpec, N: int, zs: np.ndarray) -> np.ndarray:
    """‖sum_{k=0}^{N} z^{-k-1} W_k‖ on the N-slot truncation, for every p < m (maximum taken)."""
    best = np.zeros(zs.size)
    for p in range(spec.m):
        d = 1 << p
        table = B_table(spec, p, N)
        # slot i (0-based) is coupled to slot i + k by B_{p,k,i+1} = table[i, k-1]
        i0, k = np.nonzero(np.arange(1, N)[None, :] <= (N - 1 - np.arange(N - 1))[:, None])
        k = k + 1
        blocks = table[i0, k - 1]
        a = np.arange(d)
        rows = np.broadcast_to(i0[:, None, None] * d + a[None, :, None], blocks.shape)
        cols = np.broadcast_to((i0 + k)[:, None, None] * d + a[None, None, :], blocks.shape)
        for t, z in enumerate(zs):
            H = np.zeros((N * d, N * d), dtype=complex)
            H[rows, cols] = (z ** (-(k + 1.0)))[:, None, None] * blocks
            best[t] = max(best[t], op_norm(H))
    return best


def estimate_L(c: float, N_list=(64, 128), z_grid=None, m: int = 1) -> dict:
    """Empirical C_0 = max over N, z of (|z| - 1) ‖sum_k z^{-k-1} W_k(c)‖."""
    if not 0 < c <= 1:
        raise InputError(f"c must lie in (0, 1], got {c}")
    zs = make_z_grid() if z_grid is None else np.asarray(z_grid, dtype=complex).ravel()
    spec = ShiftFamilySpec("cesaro", m, c)
    best, arg = 0.0, None
    for N in N_list:
        vals = (np.abs(zs) - 1.0) * _W_generating_norms(spec, int(N), zs)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), (int(N), zs[i])
    return {"L": best, "N": arg[0] if arg else None,
            "z": [arg[1].real, arg[1].imag] if arg else None,
            "grid_points": int(zs.size), "label": "empirical grid supremum"}


def _bisect_root(fn, lo: float, hi: float, iters: int = 200) -> float:
    # fn(lo) and fn(hi) have opposite signs
    flo = fn(lo) > 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (fn(mid) > 0) == flo:
            lo = mid
        else:
            hi = mid
        if hi - lo <= max(0.25, 1e-15 * hi):
            break
    return 0.5 * (lo + hi)


def _eps_inv_sqrt_log(lx: float, N0: int, L: float) -> float:
    # f(N) = L / sqrt(ln N) - e^{-N lx}; f' > 0 iff g(N) > 0 with g strictly concave on N > 1, so f
    # decreases, then increases up to the larger root of g, then decreases
    def f(N):
        return L / math.sqrt(math.log(N)) - math.exp(-N * lx)

    def g(N):
        return math.log(lx) - N * lx - math.log(L / 2.0) + math.log(N) + 1.5 * math.log(math.log(N))

    def dg(N):
        return -lx + 1.0 / N + 1.5 / (N * math.log(N))

    best = f(N0)
    hi = float(N0)
    while dg(hi) > 0:
        hi *= 2.0
    peak = float(N0) if dg(float(N0)) <= 0 else _bisect_root(dg, float(N0), hi)
    if g(peak) <= 0:
        return best
    far = max(peak, 1.0) * 2.0
    while g(far) > 0:
        far *= 2.0
    root = _bisect_root(g, peak, far)
    for N in (math.floor(root), math.ceil(root)):
        if N >= N0:
            best = max(best, f(N))
    return best


def epsilon_of_x(x: float, cn: CNSequence, L: float) -> float:
    """sup_{N >= N0} (c_N L - (1+x)^{-N}).

    For c_N = 1/sqrt(log N) the supremum is located from the sign pattern of
    the derivative (at most one interior local maximum).  Tabulated sequences
    are scanned in order, stopping once c_N L falls below the running maximum;
    the second term is positive, so no later N can do better.
    """
    if not x > 0:
        raise InputError("x must be positive")
    if not L > 0:
        raise InputError("L must be positive")
    lx = math.log1p(x)
    if cn.generator == "inv_sqrt_log":
        return _eps_inv_sqrt_log(lx, cn.N0, L)
    Ns = np.arange(cn.N0, cn.N0 + len(cn.table))
    best, _, last = kernels.eps_scan(cn.values(Ns) * L, cn.N0, lx)
    if last == Ns[-1]:
        # beyond the table c_N = 0 and the terms -(1+x)^{-N} increase towards 0
        best = max(best, -math.exp(-(last + 1) * lx))
    return best


def resolvent_envelope_check(N: int, c: float, L: float, z_grid=None) -> float:
    """min over z of (1 + cL - |z|^{-N})/(|z| - 1) - ‖(z - X_{1,N}(c))^{-1}‖."""
    if not c * L < 1:
        raise InputError("need c L < 1")
    zs = make_z_grid() if z_grid is None else np.asarray(z_grid, dtype=complex).ravel()
    X = build_truncated_shift(ShiftFamilySpec("cesaro", 1, c), TruncationSpec(N))
    worst = math.inf
    for z in zs:
        a = abs(z)
        env = (1.0 + c * L - a ** -N) / (a - 1.0)
        worst = min(worst, env - resolvent_norm(X, z))
    return worst


def counterexample_powers(cn: CNSequence, N_list) -> list[dict]:
    """‖X_{1,N}(c_N)^{N-1}‖ next to c_N ln N; the power is the single nonzero block product."""
    rows = []
    for N in N_list:
        N = int(N)
        c = float(cn.values(np.array([N]))[0])
        P = weight_product(ShiftFamilySpec("cesaro", 1, c), np.arange(2, N + 1))
        rows.append({"N": N, "c_N": c, "power": op_norm(P), "lower": c * math.log(N)})
    return rows


# ---------------------------------------------------------------------------
# Foguel-Hankel model

def pisier_coeffs_sq(beta: BetaSequence, count: int) -> np.ndarray:
    """|a_n|^2 = beta_{n+1}/(n+1)^2 - beta_{n+2}/(n+2)^2 for n = 0..count-1."""
    n = np.arange(count + 1, dtype=float)
    g = beta.values(np.arange(1, count + 2)) / (n + 1.0) ** 2
    sq = g[:-1] - g[1:]
    if np.any(sq < 0):
        raise InvariantViolation("n^-2 beta_n is not nonincreasing")
    return sq


def pisier_coeffs(beta: BetaSequence, n: int) -> float:
    if n < 0 or n + 2 > beta.length:
        raise InputError(f"need 0 <= n and n + 2 <= {beta.length}")
    return float(math.sqrt(pisier_coeffs_sq(beta, n + 1)[n]))


def _hankel_units(a: np.ndarray, M: int, n: int) -> sp.csr_matrix:
    """n X S^{n-1} for X with blocks a_{i+j} E_{i+j,0} (i + j <= M - 1), on (C^M)^M.

    Row index i*M + k, column index j*M + l (block, coordinate).
    """
    i, j = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    k = i + j + n - 1
    sel = k <= M - 1
    i, j, k = i[sel], j[sel], k[sel]
    return sp.csr_matrix((n * a[k], (i * M + k, j * M)), shape=(M * M, M * M))


def _sparse_norm(X: sp.spmatrix) -> float:
    G = (X.conj().T @ X).tocsc()
    used = np.unique(G.nonzero()[1])
    if used.size == 0:
        return 0.0
    sub = G[used][:, used].toarray()
    return float(math.sqrt(max(np.linalg.eigvalsh(sub)[-1], 0.0)))


def pisier_X_norm(beta: BetaSequence, n: int, M: int) -> tuple[float, float]:
    """(matrix norm of the truncated n X S^{n-1}, telescoped closed form sqrt(beta_n - n^2 beta_{M+1}/(M+1)^2))."""
    if n < 1 or M < n + 2:
        raise InputError("need n >= 1 and M >= n + 2")
    a = np.sqrt(pisier_coeffs_sq(beta, M))
    mat = _sparse_norm(_hankel_units(a, M, n))
    b = beta.values(np.array([n, M + 1]))
    closed = math.sqrt(b[0] - n * n * b[1] / (M + 1.0) ** 2)
    return mat, closed


def _foguel_hankel(a: np.ndarray, M: int) -> sp.csr_matrix:
    S = sp.kron(sp.eye(M, k=-1), sp.eye(M), format="csr")
    X = _hankel_units(a, M, 1)
    return sp.bmat([[S.T, X], [None, S]], format="csr")


def build_foguel_hankel_trunc(beta: BetaSequence, M: int) -> sp.csr_matrix:
    """[[S*, X], [0, S]] on (C^M)^M + (C^M)^M, sparse, dimension 2 M^2."""
    if not 2 <= M <= 1024:
        raise InputError("M must lie in [2, 1024]")
    return _foguel_hankel(np.sqrt(pisier_coeffs_sq(beta, M)), M)


def foguel_hankel_power_norm(a: np.ndarray, M: int, n: int) -> float:
    """Exact ‖F^n‖ for the truncated model.

    Each y_j = x_j[0] couples to a star of orthogonal output coordinates, so
    F^n* F^n splits into 2 x 2 blocks [[1, q_j], [q_j, b_j + c_j]] and identity.
    """
    if n < 1:
        raise InputError("n must be positive")
    a2 = np.abs(np.asarray(a[:M])) ** 2
    # the shift parts act isometrically on some coordinates as long as S^n != 0
    best = 1.0 if n <= M - 1 else 0.0
    for j in range(M):
        imax = M - j - n          # k = i + j + n - 1 <= M - 1
        if imax < 0:
            b = q2 = 0.0
            linked = False
        else:
            ks = np.arange(j + n - 1, j + n + imax)
            b = n * n * float(np.sum(a2[ks]))
            # the S*^n term reaches top block i only when i + n <= M - 1
            ilink = min(imax, M - n - 1)
            linked = ilink >= 0
            q2 = n * n * float(np.sum(a2[ks[: ilink + 1]])) if linked else 0.0
        d = b + (1.0 if j + n < M else 0.0)
        if linked:
            # largest eigenvalue of [[1, q], [q, d]] with q^2 = q2
            d = 0.5 * (1.0 + d) + math.sqrt(0.25 * (d - 1.0) ** 2 + q2)
        best = max(best, d)
    return math.sqrt(best)


def foguel_hankel_norms(beta: BetaSequence, M: int, n_max: int) -> np.ndarray:
    a = np.sqrt(pisier_coeffs_sq(beta, M))
    return np.array([foguel_hankel_power_norm(a, M, n) for n in range(1, n_max + 1)])


def epsconversion_ratio(a: float) -> float:
    """sum_{n>=2} a^n / sqrt(log n) divided by |log(1-a)|^{-1/2} / (1-a)."""
    if not 0 < a < 1:
        raise InputError("a must lie in (0, 1)")
    series = kernels.log_inv_sqrt_series(a)
    return series / (abs(math.log1p(-a)) ** -0.5 / (1.0 - a))


def resolvent_epsilon_profile(F_norms, lam_abs: float) -> tuple[float, float]:
    """Neumann majorant sum_n F_norms[n] / |lambda|^{n+1} and the implied eps(|lambda| - 1)."""
    if not lam_abs > 1:
        raise InputError("|lambda| must exceed 1")
    f = np.asarray(F_norms, dtype=float)
    n = np.arange(f.size)
    terms = f * np.exp(-(n + 1.0) * math.log(lam_abs))
    total = float(np.sum(terms))
    if not math.isfinite(total) or terms[-1] > 1e-16 * total:
        raise RangeError("majorant not summable over the supplied norms")
    x = lam_abs - 1.0
    return total, total * x - 1.0
