"""Closed-form growth bounds and the experiments that compare them with measured powers."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from .constructions import (ShiftFamilySpec, TruncationSpec, build_truncated_shift, corner_entry,
                            weight_product)
from .errors import InputError, RangeError
from .linalg import op_norm

CHAIN_TOL = 1e-9
KAPPA_MAX_M = 12
_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


def _check_eps_m(eps: float, m: int) -> None:
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps}")
    if int(m) != m or m < 1:
        raise InputError(f"m must be a positive integer, got {m}")


def _bracket(m: int) -> float:
    return 2.0 ** (m - 0.5) + 2.0 ** (3 * m - 0.5) * float(m) ** m * math.sqrt(6.0)


def c_of_eps(eps: float, m: int) -> float:
    """Weight scale c(eps, m) = eps / (m (2^{m-1/2} + 2^{3m-1/2} m^m sqrt 6))."""
    _check_eps_m(eps, m)
    return eps / (m * _bracket(m))


def log_kappa(m: int) -> float:
    _check_eps_m(1.0, m)
    return m * math.log(4.0 * m) + m * math.log(_bracket(m))


def log_kappa_bound(m: int) -> float:
    _check_eps_m(1.0, m)
    return (m * m + m) * math.log(8.0 * m)


def _exp_checked(logv: float, m: int, what: str) -> float:
    if m > KAPPA_MAX_M or logv >= _LOG_FLOAT_MAX:
        raise RangeError(f"{what}({m}) overflows double precision; use the log-space value {logv!r}")
    return math.exp(logv)


def kappa(m: int) -> float:
    """kappa_m = (4m)^m [2^{m-1/2} + 2^{3m-1/2} m^m sqrt 6]^m."""
    return _exp_checked(log_kappa(m), m, "kappa")


def kappa_bound(m: int) -> float:
    """(8m)^{m^2 + m}."""
    return _exp_checked(log_kappa_bound(m), m, "kappa_bound")


def lower_bound_log_m(N: int, eps: float, m: int) -> tuple[float, bool]:
    """(eps^m / kappa_m) ln^m N and whether N >= m^2 4^m."""
    _check_eps_m(eps, m)
    if N < 2:
        raise InputError("N must be at least 2")
    value = math.exp(m * math.log(eps) - log_kappa(m) + m * math.log(math.log(N)))
    return value, bool(N >= m * m * 4 ** m)


def lower_bound_iterated(N: float, eps: float, alpha: float) -> tuple[float | None, int, bool]:
    """exp(alpha v^2 / ln v) with v = ln(eps ln N) and m = floor(v / (2 ln v)).

    Returns (value, m_used, valid); value is None when v <= 1.
    """
    if not 0 < alpha < 0.25:
        raise InputError(f"alpha must lie in (0, 1/4), got {alpha}")
    if not eps > 0 or not 1 < N < math.inf:
        raise InputError("need eps > 0 and finite N > 1")
    v = math.log(eps * math.log(N))
    if v <= 1.0:
        return None, 0, False
    m_used = int(math.floor(v / (2.0 * math.log(v))))
    value = math.exp(alpha * v * v / math.log(v))
    valid = m_used >= 1 and math.log(m_used * m_used) + 2 * m_used * math.log(2.0) <= math.log(N)
    return value, m_used, bool(valid)


def comparison_bounds(N: int, K: float) -> dict:
    """Upper bound e K N and, when K > pi + 1, the lower bound N^{1 - 2/K} / 5."""
    if N < 1 or K < 1:
        raise InputError("need N >= 1 and K >= 1")
    out = {"spijker": math.e * K * N}
    if K > math.pi + 1:
        out["nikolski"] = N ** (1.0 - 2.0 / K) / 5.0
    if N > math.e:
        # constant unknown: only the growth shape is meaningful
        out["mccarthy_shape"] = math.sqrt(math.log(math.log(N))) if math.log(N) > 1 else 0.0
        out["flags"] = ["mccarthy_shape is shape-only"]
    return out


@dataclass
class BoundReport:
    N: int
    eps: float | None
    m: int
    bound_value: float
    measured_power: float
    corner: float
    valid: bool
    chain_ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def chain_holds(bound: float, corner: float, power: float) -> bool:
    return bound <= corner + CHAIN_TOL and corner <= power * (1 + CHAIN_TOL)


def verify_power_vs_bound(spec: ShiftFamilySpec, N: int, eps: float | None = None) -> BoundReport:
    """Compare c^m ln^m(N/m), the corner entry and ||X^{N-1}|| (dense power)."""
    if spec.variant != "cesaro":
        raise InputError("the corner chain is stated for the cesaro family")
    m = spec.m
    if m < 1 or N <= m:
        raise InputError("need m >= 1 and N > m")
    X = build_truncated_shift(spec, TruncationSpec(N))
    measured = op_norm(np.linalg.matrix_power(X, N - 1))
    corner = corner_entry(spec, N)
    bound = spec.c ** m * math.log(N / m) ** m
    return BoundReport(N=N, eps=eps, m=m, bound_value=bound, measured_power=measured,
                       corner=corner, valid=True, chain_ok=chain_holds(bound, corner, measured))


def strong_kreiss_growth_table(c: float, m: int, N_list,
                               variant: str = "strong_kreiss_telescoping") -> list[dict]:
    """Rows (N, ||X^{N-1}||, c^m ln^m(ln(N+2)/ln 2), ok).

    X^{N-1} has a single nonzero block, the product A_{m,2} ... A_{m,N}, so its
    norm is computed from that block.
    """
    spec = ShiftFamilySpec(variant, m, c)
    rows = []
    for N in N_list:
        N = int(N)
        if N < 2:
            raise InputError("N must be at least 2")
        measured = op_norm(weight_product(spec, np.arange(2, N + 1)))
        predicted = (c * math.log(math.log(N + 2) / math.log(2))) ** m
        rows.append({"N": N, "measured": measured, "predicted": predicted,
                     "ok": bool(measured >= predicted)})
    return rows


CSV_HEADER = ["N", "eps", "m", "bound", "corner", "power", "valid", "chain_ok"]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow([r.N, "" if r.eps is None else repr(r.eps), r.m, repr(r.bound_value),
                    repr(r.corner), repr(r.measured_power), str(r.valid).lower(),
                    str(r.chain_ok).lower()])
    return buf.getvalue()
