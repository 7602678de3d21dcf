"""Pure-Python versions of the compiled kernels.

Every function here has the same signature and semantics as its counterpart
in ``_kernels.pyx``; ``kernels.py`` picks one of the two at import time.

J_m denotes the 2^m x 2^m 0/1 matrix with J[a, b] = 1 iff b is a with one
zero bit switched on.  All weight matrices of the shift families are of the
form I + s J_m, which is what these loops exploit.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp


def _apply_J_right(P: np.ndarray, m: int) -> np.ndarray:
    # (P J)[:, b] = sum over set bits i of b of P[:, b ^ (1 << i)]
    out = np.zeros_like(P)
    cols = np.arange(P.shape[-1])
    for i in range(m):
        bit = 1 << i
        sel = (cols & bit) != 0
        out[..., sel] += P[..., cols[sel] ^ bit]
    return out


def corner_row(s, m: int) -> np.ndarray:
    """First row of the ordered product prod_k (I + s_k J_m)."""
    s = np.asarray(s, dtype=np.float64)
    x = np.zeros(1 << m)
    x[0] = 1.0
    for sk in s:
        x = x + sk * _apply_J_right(x, m)
    return x


def weight_chain(s, m: int) -> np.ndarray:
    """Ordered product prod_k (I + s_k J_m) as a dense matrix."""
    s = np.asarray(s, dtype=np.float64)
    P = np.eye(1 << m)
    for sk in s:
        P = P + sk * _apply_J_right(P, m)
    return P


def chain_derivative(ell, c: float, p: int) -> np.ndarray:
    """Prefix sums Q_t = sum_{k<=t} ell_k prod_{r<=t, r!=k} (I + c ell_r J_p).

    Returns an array of shape (len(ell), 2^p, 2^p); entry t is Q after t+1 factors.
    """
    ell = np.asarray(ell, dtype=np.float64)
    d = 1 << p
    P = np.eye(d)
    Q = np.zeros((d, d))
    out = np.empty((ell.size, d, d))
    for t, lk in enumerate(ell):
        s = c * lk
        Q = Q + s * _apply_J_right(Q, p) + lk * P
        P = P + s * _apply_J_right(P, p)
        out[t] = Q
    return out


def log_inv_sqrt_series(a: float, rtol: float = 1e-16) -> float:
    """sum_{n>=2} a^n / sqrt(log n), stopped once a term drops below rtol * partial sum."""
    total = 0.0
    n = 2
    term_pow = a * a
    while True:
        term = term_pow / math.sqrt(math.log(n))
        total += term
        if term < rtol * total:
            break
        n += 1
        term_pow *= a
        if term_pow == 0.0:
            break
    return total


def eps_scan(cL, N0: int, log1px: float):
    """max over N >= N0 of cL[N - N0] - exp(-N log1p(x)) with the stop rule cL < best.

    ``cL`` must be nonincreasing.  Returns (best, argmax N, last N inspected).
    """
    cL = np.asarray(cL, dtype=np.float64)
    best = -math.inf
    arg = N0
    last = N0
    for i in range(cL.size):
        if cL[i] < best:
            break
        N = N0 + i
        last = N
        v = cL[i] - math.exp(-N * log1px)
        if v > best:
            best = v
            arg = N
    return best, arg, last


def abs_cesaro_step(A, AH, x, n: int):
    """One ascent step for f_n(x) = (1/n) sum_{j=1..n} ||A^j x||.

    ``A`` and ``AH`` are CSR matrices (AH the conjugate transpose).  Returns
    (f_n(x), y) where y = sum_j A^{*j} A^j x / ||A^j x|| (terms with a zero
    norm dropped).
    """
    A = sp.csr_matrix(A)
    AH = sp.csr_matrix(AH)
    v = np.asarray(x)
    ws = []
    total = 0.0
    for _ in range(n):
        v = A @ v
        nv = float(np.linalg.norm(v))
        total += nv
        ws.append(v / nv if nv > 0.0 else None)
    y = np.zeros_like(v)
    for w in reversed(ws):
        if w is not None:
            y = y + w
        y = AH @ y
    return total / n, y
