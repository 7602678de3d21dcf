"""Explicit finite matrices for the matrix-weighted shift families.

The weight A_{m,k}(c) is the 2^m x 2^m unit upper-triangular matrix defined
recursively by A_{0,k} = 1 and

    A_{m,k} = [[A_{m-1,k}, c l_k I], [0, A_{m-1,k}]],

where l_k depends on the family variant.  Unrolling the recursion gives
A_{m,k} = I + c l_k J_m with J_m the "switch on one zero bit" incidence
matrix, so all weights of one family commute.  ``weight_matrix`` follows the
recursion literally; everything else uses the I + s J form (tests check that
the two agree).

Slots are 0-based in code.  Block (i, i+1) of the truncated shift holds
A_{m, i+2}, so the first weight is A_{m,2}.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.linalg as sla

from . import kernels
from .errors import InputError, InvariantViolation, ResourceError

VARIANTS = ("cesaro", "strong_kreiss_telescoping", "strong_kreiss_literal")
VARIANT_ALIASES = {"strong_kreiss": "strong_kreiss_telescoping"}
MAX_DEPTH = 8
MAX_TRUNCATED_DIM = 2 ** 20
# dense float64 matrices above this size are refused (8192^2 doubles = 512 MiB)
DENSE_DIM_CAP = 8192


@dataclass(frozen=True)
class ShiftFamilySpec:
    variant: str = "cesaro"
    m: int = 1
    c: float = 0.0

    def __post_init__(self):
        variant = VARIANT_ALIASES.get(self.variant, self.variant)
        object.__setattr__(self, "variant", variant)
        if variant not in VARIANTS:
            raise InvariantViolation(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if int(self.m) != self.m or not 0 <= self.m <= MAX_DEPTH:
            raise InvariantViolation(f"m must be an integer in [0, {MAX_DEPTH}], got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        if not (math.isfinite(self.c) and self.c >= 0):
            raise InvariantViolation(f"c must be finite and nonnegative, got {self.c}")
        object.__setattr__(self, "c", float(self.c))

    @property
    def block(self) -> int:
        return 1 << self.m

    def with_depth(self, m: int) -> ShiftFamilySpec:
        return ShiftFamilySpec(self.variant, m, self.c)


@dataclass(frozen=True)
class TruncationSpec:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise InvariantViolation(f"N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    def check(self, spec: ShiftFamilySpec) -> None:
        if spec.block * self.N > MAX_TRUNCATED_DIM:
            raise InvariantViolation(
                f"dimension 2^{spec.m}*{self.N} exceeds {MAX_TRUNCATED_DIM}")


def parse_family(text: str) -> tuple[ShiftFamilySpec, TruncationSpec | None]:
    """Parse strings like ``cesaro:m=2,c=0.05,N=256``."""
    m = re.fullmatch(r"\s*([A-Za-z_]+)\s*(?::(.*))?", text)
    if not m:
        raise InputError(f"cannot parse family spec {text!r}")
    variant = m.group(1)
    fields: dict[str, str] = {}
    if m.group(2):
        for part in m.group(2).split(","):
            if not part.strip():
                continue
            key, sep, value = part.partition("=")
            if not sep:
                raise InputError(f"expected key=value in {text!r}, got {part!r}")
            fields[key.strip()] = value.strip()
    unknown = set(fields) - {"m", "c", "N"}
    if unknown:
        raise InputError(f"unknown keys {sorted(unknown)} in {text!r}")
    try:
        spec = ShiftFamilySpec(variant, int(fields.get("m", 1)), float(fields.get("c", 0.0)))
        trunc = TruncationSpec(int(fields["N"])) if "N" in fields else None
    except (ValueError, InvariantViolation) as exc:
        raise InputError(str(exc)) from exc
    return spec, trunc


def log_weights(variant: str, k) -> np.ndarray:
    """Scalar off-diagonal factors l_k (before multiplying by c)."""
    k = np.asarray(k, dtype=np.float64)
    if np.any(k < 2):
        raise InputError("weight indices start at k = 2")
    variant = VARIANT_ALIASES.get(variant, variant)
    if variant == "cesaro":
        return np.log1p(1.0 / (k - 1.0))
    if variant == "strong_kreiss_telescoping":
        return np.log(np.log(k + 2.0) / np.log(k + 1.0))
    if variant == "strong_kreiss_literal":
        return np.log(np.log(k + 2.0) / math.log(2.0))
    raise InputError(f"unknown variant {variant!r}")


def incidence_J(m: int) -> np.ndarray:
    d = 1 << m
    J = np.zeros((d, d))
    for a in range(d):
        for i in range(m):
            if not a & (1 << i):
                J[a, a | (1 << i)] = 1.0
    return J


def weight_matrix(spec: ShiftFamilySpec, k: int) -> np.ndarray:
    """A_{m,k}(c) built by the block recursion."""
    if int(k) != k or k < 2:
        raise InputError(f"weight index must be an integer >= 2, got {k}")
    s = spec.c * float(log_weights(spec.variant, k))
    A = np.ones((1, 1))
    for _ in range(spec.m):
        d = A.shape[0]
        A = np.block([[A, s * np.eye(d)], [np.zeros((d, d)), A]])
    return A


def weight_product(spec: ShiftFamilySpec, ks) -> np.ndarray:
    """Ordered product A_{m,k_1} A_{m,k_2} ... for the given indices."""
    ks = np.asarray(ks)
    return kernels.weight_chain(spec.c * log_weights(spec.variant, ks), spec.m)


def corner_entry(spec: ShiftFamilySpec, N: int) -> float:
    """(1, 2^m) entry of A_{m,2} A_{m,3} ... A_{m,N}; only the first row is carried."""
    if int(N) != N or N < 2:
        raise InputError(f"N must be an integer >= 2, got {N}")
    s = spec.c * log_weights(spec.variant, np.arange(2, int(N) + 1))
    return float(kernels.corner_row(s, spec.m)[-1])


def _check_p(spec: ShiftFamilySpec, p: int) -> None:
    if int(p) != p or not 0 <= p < spec.m:
        raise InputError(f"need 0 <= p < m = {spec.m}, got p = {p}")


def block_B(spec: ShiftFamilySpec, p: int, n: int, j: int) -> np.ndarray:
    """B_{p,n,j+1}(c) = sum_{k=j+2}^{n+j+1} l_k prod_{r != k} A_{p,r}(c)."""
    _check_p(spec, p)
    if n < 1 or j < 0:
        raise InputError("need n >= 1 and j >= 0")
    ell = log_weights(spec.variant, np.arange(j + 2, n + j + 2))
    return kernels.chain_derivative(ell, spec.c, p)[-1]


def _dense_guard(dim: int) -> None:
    if dim > DENSE_DIM_CAP:
        raise ResourceError(f"dense matrix of dimension {dim} exceeds the cap {DENSE_DIM_CAP}")


def build_truncated_shift(spec: ShiftFamilySpec, trunc: TruncationSpec) -> np.ndarray:
    """Compression X_{m,N}(c) of the weighted backward shift to N slots."""
    trunc.check(spec)
    d, N = spec.block, trunc.N
    _dense_guard(d * N)
    X = np.zeros((d * N, d * N))
    J = incidence_J(spec.m)
    eye = np.eye(d)
    s = spec.c * log_weights(spec.variant, np.arange(2, N + 1))
    for i in range(N - 1):
        X[i * d:(i + 1) * d, (i + 1) * d:(i + 2) * d] = eye + s[i] * J
    return X


def B_table(spec: ShiftFamilySpec, p: int, N: int) -> np.ndarray:
    """All B_{p,n,i}(c) needed at truncation N.

    Returns T with T[i - 1, n - 1] = B_{p,n,i} for slots i = 1..N-1 and
    shifts n = 1..N-i (unused entries are zero).
    """
    _check_p(spec, p)
    d = 1 << p
    out = np.zeros((N - 1, N - 1, d, d))
    for i in range(1, N):
        ell = log_weights(spec.variant, np.arange(i + 1, N + 1))
        out[i - 1, : N - i] = kernels.chain_derivative(ell, spec.c, p)
    return out


def build_W_truncated(spec: ShiftFamilySpec, p: int, n: int, trunc: TruncationSpec,
                      table: np.ndarray | None = None) -> np.ndarray:
    """Compression of W_{p+1,n}(c): slot i receives B_{p,n,i} applied to slot i+n."""
    _check_p(spec, p)
    d, N = 1 << p, trunc.N
    _dense_guard(d * N)
    W = np.zeros((d * N, d * N))
    if n >= N or n < 1:
        return W
    if table is None:
        table = B_table(spec, p, N)
    for i in range(1, N - n + 1):
        r0, c0 = (i - 1) * d, (i - 1 + n) * d
        W[r0:r0 + d, c0:c0 + d] = table[i - 1, n - 1]
    return W


def embedding_offsets(m: int, level: int) -> list[int]:
    """Coordinate offsets of the embeddings Q_I, I in {1,2}^level, inside C^{2^m}."""
    offs = []
    for idx in product((1, 2), repeat=level):
        offs.append(sum((it - 1) << (m - t) for t, it in enumerate(idx, start=1)))
    return offs


def decomposed_power(spec: ShiftFamilySpec, trunc: TruncationSpec, n: int,
                     tables: dict | None = None) -> np.ndarray:
    """S^n + c * sum over levels of the embedded W blocks, assembled by index maps."""
    m, D, N = spec.m, spec.block, trunc.N
    _dense_guard(D * N)
    out = np.zeros((D * N, D * N))
    if n >= N:
        return out
    slots = np.arange(N - n)
    for a in range(D):
        out[slots * D + a, (slots + n) * D + a] = 1.0
    if n == 0:
        return np.eye(D * N)
    for level in range(m):
        p = m - level - 1
        half = 1 << p
        table = (tables or {}).get(p)
        if table is None:
            table = B_table(spec, p, N)
            if tables is not None:
                tables[p] = table
        blocks = table[: N - n, n - 1]
        a_idx = np.arange(half)
        for off in embedding_offsets(m, level):
            rows = (slots[:, None] * D + off + a_idx[None, :])
            cols = ((slots + n)[:, None] * D + off + half + a_idx[None, :])
            out[rows[:, :, None], cols[:, None, :]] += spec.c * blocks
    return out


def build_plain_shift(N: int, blockdim: int = 1) -> np.ndarray:
    if N < 1 or blockdim < 1:
        raise InputError("need N >= 1 and blockdim >= 1")
    _dense_guard(N * blockdim)
    return np.kron(np.eye(N, k=1), np.eye(blockdim))


def build_muller_shift(N: int, a: float) -> np.ndarray:
    """Backward shift with weights (k/(k-1))^a, k = 2..N, on the superdiagonal."""
    if not 0 < a < 0.5:
        raise InputError(f"exponent must lie in (0, 1/2), got {a}")
    if N < 1:
        raise InputError("N must be positive")
    _dense_guard(N)
    k = np.arange(2, N + 1, dtype=np.float64)
    return np.diag(np.exp(a * np.log1p(1.0 / (k - 1.0))), k=1)


def build_direct_sum(blocks) -> np.ndarray:
    mats = [np.asarray(b) for b in blocks]
    if not mats:
        raise InputError("need at least one block")
    for b in mats:
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise InputError("direct-sum blocks must be square")
    _dense_guard(sum(b.shape[0] for b in mats))
    return sla.block_diag(*mats)
