# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; see _kernels_py.py for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, exp

cnp.import_array()

ctypedef fused scalar_t:
    double
    double complex


cdef inline void _row_J_update(double[::1] x, int m, double s) noexcept nogil:
    # in place x <- x + s * (x J); descending b so that x[b ^ bit] is still old
    cdef Py_ssize_t b, i, d = 1 << m
    cdef double acc
    for b in range(d - 1, 0, -1):
        acc = 0.0
        for i in range(m):
            if b & (1 << i):
                acc += x[b ^ (1 << i)]
        x[b] += s * acc


def corner_row(s, int m):
    cdef double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    out = np.zeros(1 << m)
    cdef double[::1] x = out
    cdef Py_ssize_t k
    x[0] = 1.0
    with nogil:
        for k in range(sv.shape[0]):
            _row_J_update(x, m, sv[k])
    return out


def weight_chain(s, int m):
    cdef double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t d = 1 << m
    out = np.eye(d)
    cdef double[:, ::1] P = out
    cdef Py_ssize_t k, r
    with nogil:
        for k in range(sv.shape[0]):
            for r in range(d):
                _row_J_update(P[r], m, sv[k])
    return out


def chain_derivative(ell, double c, int p):
    cdef double[::1] lv = np.ascontiguousarray(ell, dtype=np.float64)
    cdef Py_ssize_t n = lv.shape[0], d = 1 << p
    out = np.empty((n, d, d))
    cdef double[:, :, ::1] O = out
    P_arr = np.eye(d)
    Q_arr = np.zeros((d, d))
    cdef double[:, ::1] P = P_arr
    cdef double[:, ::1] Q = Q_arr
    cdef Py_ssize_t t, r, b, i
    cdef double s, lk, acc
    with nogil:
        for t in range(n):
            lk = lv[t]
            s = c * lk
            for r in range(d):
                # Q row r: Q + s Q J + lk P, using the old P row
                for b in range(d - 1, -1, -1):
                    acc = 0.0
                    for i in range(p):
                        if b & (1 << i):
                            acc += Q[r, b ^ (1 << i)]
                    Q[r, b] += s * acc + lk * P[r, b]
                _row_J_update(P[r], p, s)
            for r in range(d):
                for b in range(d):
                    O[t, r, b] = Q[r, b]
    return out


def log_inv_sqrt_series(double a, double rtol=1e-16):
    cdef double total = 0.0, term, term_pow = a * a
    cdef long n = 2
    with nogil:
        while True:
            term = term_pow / sqrt(log(<double>n))
            total += term
            if term < rtol * total:
                break
            n += 1
            term_pow *= a
            if term_pow == 0.0:
                break
    return total


def eps_scan(cL, long N0, double log1px):
    cdef double[::1] v = np.ascontiguousarray(cL, dtype=np.float64)
    cdef double best = -np.inf, val
    cdef long arg = N0, last = N0, N
    cdef Py_ssize_t i
    with nogil:
        for i in range(v.shape[0]):
            if v[i] < best:
                break
            N = N0 + i
            last = N
            val = v[i] - exp(-N * log1px)
            if val > best:
                best = val
                arg = N
    return best, arg, last


cdef void _csr_matvec(const int[::1] indptr, const int[::1] indices, const scalar_t[::1] data,
                      const scalar_t[::1] x, scalar_t[::1] y) noexcept nogil:
    cdef Py_ssize_t r, k
    cdef scalar_t acc
    for r in range(indptr.shape[0] - 1):
        acc = 0
        for k in range(indptr[r], indptr[r + 1]):
            acc = acc + data[k] * x[indices[k]]
        y[r] = acc


cdef double _norm2(const scalar_t[::1] v) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(v.shape[0]):
        if scalar_t is double:
            acc += v[i] * v[i]
        else:
            acc += v[i].real * v[i].real + v[i].imag * v[i].imag
    return sqrt(acc)


def _abs_cesaro_step(const int[::1] ip, const int[::1] ix, const scalar_t[::1] dat,
                     const int[::1] hip, const int[::1] hix, const scalar_t[::1] hdat,
                     scalar_t[::1] x, int n, scalar_t[:, ::1] W, scalar_t[::1] y, scalar_t[::1] tmp):
    cdef Py_ssize_t j, i, dim = x.shape[0]
    cdef double total = 0.0, nv
    cdef double[::1] norms = np.empty(n)
    with nogil:
        _csr_matvec(ip, ix, dat, x, W[0])
        for j in range(n):
            if j > 0:
                _csr_matvec(ip, ix, dat, W[j - 1], W[j])
            nv = _norm2(W[j])
            norms[j] = nv
            total += nv
        for i in range(dim):
            y[i] = 0
        for j in range(n - 1, -1, -1):
            if norms[j] > 0.0:
                for i in range(dim):
                    y[i] = y[i] + W[j, i] / norms[j]
            _csr_matvec(hip, hix, hdat, y, tmp)
            for i in range(dim):
                y[i] = tmp[i]
    return total / n


def abs_cesaro_step(A, AH, x, int n):
    dtype = np.complex128 if (np.iscomplexobj(A.data) or np.iscomplexobj(x)) else np.float64
    xv = np.ascontiguousarray(x, dtype=dtype)
    dim = xv.shape[0]
    W = np.empty((n, dim), dtype=dtype)
    y = np.empty(dim, dtype=dtype)
    tmp = np.empty(dim, dtype=dtype)
    val = _abs_cesaro_step(A.indptr.astype(np.int32), A.indices.astype(np.int32),
                           np.ascontiguousarray(A.data, dtype=dtype),
                           AH.indptr.astype(np.int32), AH.indices.astype(np.int32),
                           np.ascontiguousarray(AH.data, dtype=dtype),
                           xv, n, W, y, tmp)
    return val, y
