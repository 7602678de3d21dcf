"""Double-layer potential machinery for K-spectral certificates on shrinking circles.

Conventions used throughout this module:

* circles are traversed counterclockwise, sigma(theta) = r e^{i theta} and
  sigma'(theta) = i r e^{i theta};
* a v-type curve is the radial graph r(theta) e^{i theta}, pinched to the unit
  circle at theta = 0 and continued by constants outside [-delta_-, delta_+];
* with these conventions the double-layer kernel mu reproduces polynomials as
  int mu(sigma(theta), T) p(sigma(theta)) dtheta = p(T) + p(0) I.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (AdmissibilityError, ClaimViolation, InputError, InvariantViolation,
                     PreconditionError, SingularityError)
from .linalg import (as_matrix, haar_unitary, min_eig_hermitian, op_norm, poly_eval, resolvent,
                     resolvent_norm, sup_on_circle)

GL_ORDER = 16
SCAN_POINTS = 2048
ANGLE_TOL = 1e-12
QUAD_ATOL = 1e-8
MONOTONE_GRID = 10_000
MAX_GRADING = 20.0

_GL_T, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


def _panel_nodes(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_T[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _graded_side(f, delta: float, grading: float, panels: int) -> float:
    # theta = delta * t^g clusters nodes at 0; for f ~ theta^{-p} the choice g = 1/(1-p) makes the
    # integrand in t smooth
    t, w = _panel_nodes(0.0, 1.0, panels)
    theta = delta * t ** grading
    jac = delta * grading * t ** (grading - 1.0)
    return float(np.sum(f(theta) * jac * w))


def _refined(fn, start: int = 4, max_doublings: int = 12, atol: float = QUAD_ATOL):
    """Double the panel count until two successive values agree; returns (value, converged, history)."""
    history = [fn(start)]
    panels = start
    for _ in range(max_doublings):
        panels *= 2
        history.append(fn(panels))
        if abs(history[-1] - history[-2]) <= atol + 1e-12 * abs(history[-1]):
            return history[-1], True, history
    return history[-1], False, history


# ---------------------------------------------------------------------------
# epsilon profiles

EPS_FORMS = ("power", "log_inv_sqrt", "tabulated")


@dataclass(frozen=True)
class EpsilonProfile:
    """eps(x) on (0, nu0]: eps0 x^q, eps0 (log 1/x)^{-1/2}, or a piecewise-linear table."""

    form: str = "power"
    eps0: float = 0.5
    q: float = 1.0
    nu0: float = 1.0
    table_x: tuple = ()
    table_eps: tuple = ()

    def __post_init__(self):
        if self.form not in EPS_FORMS:
            raise InvariantViolation(f"unknown epsilon form {self.form!r}")
        if not self.nu0 > 0:
            raise InvariantViolation("nu0 must be positive")
        if self.form == "power" and not (self.eps0 >= 0 and self.q > 0):
            raise InvariantViolation("power profile needs eps0 >= 0 and q > 0")
        if self.form == "log_inv_sqrt" and not (self.eps0 > 0 and self.nu0 < 1):
            raise InvariantViolation("log_inv_sqrt profile needs eps0 > 0 and nu0 < 1")
        if self.form == "tabulated":
            x = np.asarray(self.table_x, dtype=float)
            e = np.asarray(self.table_eps, dtype=float)
            if x.size < 1 or x.shape != e.shape or np.any(x <= 0) or np.any(np.diff(x) <= 0):
                raise InvariantViolation("table_x must be positive and strictly increasing, same length as table_eps")
            if np.any(e < 0) or np.any(np.diff(e) < 0):
                raise InvariantViolation("tabulated eps must be nonnegative and nondecreasing")
            object.__setattr__(self, "nu0", float(min(self.nu0, x[-1])))
        self.check()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x > self.nu0 * (1 + 1e-12)):
            raise InputError(f"eps evaluated beyond its domain (0, {self.nu0}]")
        xp = np.maximum(x, 0.0)
        if self.form == "power":
            out = self.eps0 * xp ** self.q
        elif self.form == "log_inv_sqrt":
            with np.errstate(divide="ignore"):
                out = np.where(xp > 0, self.eps0 / np.sqrt(np.log(1.0 / np.where(xp > 0, xp, 0.5))), 0.0)
        else:
            out = np.interp(xp, np.r_[0.0, self.table_x], np.r_[0.0, self.table_eps])
        return out if out.ndim else float(out)

    def check(self) -> None:
        xs = [10.0 ** -k for k in range(1, 13) if 10.0 ** -k <= self.nu0]
        vals = np.array([self(x) for x in xs])
        if np.any(vals < 0) or np.any(np.diff(vals) > 1e-15 * np.maximum(1.0, vals[:-1])):
            raise InvariantViolation("eps must be nonnegative and increasing near 0")


# ---------------------------------------------------------------------------
# v-type curves

@dataclass(frozen=True)
class VTypeCurve:
    """Radial profile r(theta) with r(0) = 1 and r(-delta_-) = r(delta_+) > 1.

    ``power_law``: r = 1 + beta_pm |theta|^p, where the left coefficient is
    rescaled so that both endpoints have the same radius.  ``sampled``: values
    (theta_j, r_j) with theta_j != 0 on both sides of 0; log(r - 1) is
    interpolated linearly in log|theta| and extrapolated as a power law
    towards 0; the left branch is rescaled to equalize the endpoints.
    """

    kind: str = "power_law"
    beta: float = 1.0
    p: float = 0.5
    delta_minus: float = 1.0
    delta_plus: float = 1.0
    samples_theta: tuple = ()
    samples_r: tuple = ()
    _sides: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "power_law":
            if not (self.beta > 0 and 0 < self.p < 1):
                raise InvariantViolation("power_law needs beta > 0 and 0 < p < 1")
            for d in (self.delta_minus, self.delta_plus):
                if not 0 < d < math.pi:
                    raise InvariantViolation("delta_minus, delta_plus must lie in (0, pi)")
            top = self.beta * self.delta_plus ** self.p
            sides = {1: ("pow", self.beta, self.p),
                     -1: ("pow", top / self.delta_minus ** self.p, self.p)}
        elif self.kind == "sampled":
            th = np.asarray(self.samples_theta, dtype=float)
            rr = np.asarray(self.samples_r, dtype=float)
            if th.shape != rr.shape or np.any(th == 0) or np.any(rr <= 1):
                raise InvariantViolation("samples need theta != 0 and r > 1")
            sides = {}
            for sgn in (1, -1):
                sel = np.sign(th) == sgn
                if sel.sum() < 2:
                    raise InvariantViolation("need at least two samples on each side of 0")
                a = np.abs(th[sel])
                order = np.argsort(a)
                lx, ly = np.log(a[order]), np.log(rr[sel][order] - 1.0)
                if np.any(np.diff(ly) <= 0) or np.any(np.diff(lx) <= 0):
                    raise InvariantViolation("r must be strictly monotone away from 0")
                sides[sgn] = ("tab", lx, ly)
            dplus, dminus = math.exp(sides[1][1][-1]), math.exp(sides[-1][1][-1])
            if not (dplus < math.pi and dminus < math.pi):
                raise InvariantViolation("sampled angles must lie in (-pi, pi)")
            shift = sides[1][2][-1] - sides[-1][2][-1]
            sides[-1] = ("tab", sides[-1][1], sides[-1][2] + shift)
            object.__setattr__(self, "delta_plus", dplus)
            object.__setattr__(self, "delta_minus", dminus)
        else:
            raise InvariantViolation(f"unknown curve kind {self.kind!r}")
        object.__setattr__(self, "_sides", sides)
        self._check_monotone()

    def _check_monotone(self) -> None:
        for sgn, d in ((1, self.delta_plus), (-1, self.delta_minus)):
            t = np.linspace(0.0, d, MONOTONE_GRID // 2)
            r = self.r(sgn * t)
            if r[0] != 1.0 or np.any(np.diff(r) <= 0):
                raise InvariantViolation("r must equal 1 at 0 and be strictly monotone on each side")

    def _excess(self, sgn: int, a: np.ndarray) -> np.ndarray:
        side = self._sides[sgn]
        if side[0] == "pow":
            return side[1] * a ** side[2]
        lx, ly = side[1], side[2]
        out = np.zeros_like(a)
        pos = a > 0
        la = np.log(a[pos])
        slope0 = (ly[1] - ly[0]) / (lx[1] - lx[0])
        inner = la < lx[0]
        vals = np.interp(la, lx, ly)
        vals[inner] = ly[0] + slope0 * (la[inner] - lx[0])
        out[pos] = np.exp(vals)
        return out

    def excess(self, theta):
        """r(theta) - 1 without cancellation."""
        th = np.asarray(theta, dtype=float)
        scalar = th.ndim == 0
        th = np.atleast_1d(th)
        if np.any(np.abs(th) > math.pi + 1e-12):
            raise InputError("angles must lie in [-pi, pi]")
        out = np.zeros_like(th)
        pos = th > 0
        neg = th < 0
        out[pos] = self._excess(1, np.minimum(th[pos], self.delta_plus))
        out[neg] = self._excess(-1, np.minimum(-th[neg], self.delta_minus))
        return float(out[0]) if scalar else out

    def r(self, theta):
        return 1.0 + self.excess(theta)

    def local_exponent(self, sgn: int) -> float:
        """Exponent s with r(theta) - 1 ~ |theta|^s as theta -> 0 on the given side."""
        side = self._sides[sgn]
        if side[0] == "pow":
            return side[2]
        lx, ly = side[1], side[2]
        return float((ly[1] - ly[0]) / (lx[1] - lx[0]))

    @property
    def nu(self) -> float:
        return self.r(self.delta_plus) - 1.0


def vtype_r(curve: VTypeCurve, theta):
    return curve.r(theta)


def _grading(s: float) -> float:
    return min(1.0 / (1.0 - s), MAX_GRADING) if s < 1 else MAX_GRADING


def vtype_admissibility(curve: VTypeCurve, atol: float = QUAD_ATOL) -> dict:
    """Integral of 1/(r - 1) over [-delta_-, delta_+] and the |theta|/(r - 1) trend at 0."""
    total = 0.0
    histories = {}
    for sgn, d in ((1, curve.delta_plus), (-1, curve.delta_minus)):
        g = _grading(curve.local_exponent(sgn))

        def f(t, sgn=sgn):
            return 1.0 / curve.excess(sgn * t)

        val, ok, hist = _refined(lambda panels: _graded_side(f, d, g, panels), atol=atol / 2)
        histories["plus" if sgn > 0 else "minus"] = hist
        if not ok:
            raise AdmissibilityError(
                f"integral of 1/(r-1) does not settle under refinement (last values {hist[-3:]})")
        total += val
    ks = np.arange(2, 13)
    ratios = []
    for k in ks:
        t = 10.0 ** -k
        vals = [t / curve.excess(s * t) for s, d in ((1, curve.delta_plus), (-1, curve.delta_minus))
                if t <= d]
        ratios.append(max(vals))
    ratios = np.array(ratios)
    return {
        "integral": total,
        "converged": True,
        "limsup_samples": [[float(10.0 ** -k), float(v)] for k, v in zip(ks, ratios)],
        "limsup_trend": "decreasing" if np.all(np.diff(ratios) <= 0) else "not decreasing",
        "refinement": histories,
    }


# ---------------------------------------------------------------------------
# kernels

def mu_dlp(T, r: float, theta: float) -> np.ndarray:
    """Self-adjoint double-layer kernel at sigma = r e^{i theta}."""
    T = as_matrix(T, square=True)
    sigma = r * complex(math.cos(theta), math.sin(theta))
    try:
        X = (1j * sigma) * resolvent(T, sigma)
    except SingularityError as exc:
        raise SingularityError(str(exc), z=sigma, theta=theta) from exc
    return (X - X.conj().T) / (2j * math.pi)


def reproducing_residual(T, p, r: float, nodes: int = 8192) -> float:
    """‖trapezoid sum of mu p(sigma) - p(T) - p(0) I‖ on the circle of radius r."""
    T = as_matrix(T, square=True)
    coeffs = np.atleast_1d(np.asarray(p, dtype=complex))
    theta = np.linspace(-math.pi, math.pi, nodes, endpoint=False)
    sig = r * np.exp(1j * theta)
    pv = np.polyval(coeffs[::-1], sig)
    acc = np.zeros(T.shape, dtype=complex)
    for t, val in zip(theta, pv):
        acc += mu_dlp(T, r, t) * val
    acc *= 2 * math.pi / nodes
    target = poly_eval(coeffs, T.astype(complex)) + coeffs[0] * np.eye(T.shape[0])
    return op_norm(acc - target)


def poisson_factorization_check(T, v: complex, C: complex, R: float) -> float:
    """‖LHS - RHS‖ of the Poisson-type factorization with v' = (v - C)/(iR)."""
    T = as_matrix(T, square=True).astype(complex)
    if not R > 0:
        raise InputError("R must be positive")
    vp = (v - C) / (1j * R)
    if abs(abs(vp) - 1.0) > 1e-10:
        raise InputError(f"(v - C)/(iR) must be unimodular, got modulus {abs(vp)!r}")
    n = T.shape[0]
    eye = np.eye(n)
    Rv = resolvent(T, v)
    Rvbar = resolvent(T.conj().T, np.conj(v))
    lhs = (vp * Rv - np.conj(vp) * Rvbar) / 1j + eye / R
    B = T - C * eye
    Binv = np.linalg.inv(B)
    mid = eye / R ** 2 - Binv @ Binv.conj().T
    rhs = R * Rv @ B @ mid @ B.conj().T @ Rv.conj().T
    return op_norm(lhs - rhs)


# ---------------------------------------------------------------------------
# circles and angles

def circle_radius(curve: VTypeCurve, eps: EpsilonProfile, n: int, s: float = 0.5) -> float:
    """r_n = 1 + s nu_eff 2^{1-n} with nu_eff = nu - nu/(1 + eps(nu))."""
    if n < 1:
        raise InputError("n must be >= 1")
    nu = curve.nu
    if nu > eps.nu0 * (1 + 1e-12):
        raise PreconditionError(f"curve height nu = {nu} exceeds the eps domain bound {eps.nu0}")
    nu_eff = nu - nu / (1.0 + eps(nu))
    if not nu_eff > 0:
        raise PreconditionError("eps(nu) = 0 leaves no room for the circles")
    return 1.0 + s * nu_eff * 2.0 ** (1 - n)


def _G(curve: VTypeCurve, eps: EpsilonProfile, r_n: float, theta):
    x = curve.excess(theta)
    return 1.0 + x - r_n - x / (1.0 + eps(x))


def _bisect(f, lo: float, hi: float, tol: float = ANGLE_TOL) -> float:
    # f(lo) <= 0 < f(hi) or the reverse; returns the crossing
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm <= 0) == (flo <= 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_angles(curve: VTypeCurve, eps: EpsilonProfile, r_n: float) -> tuple[float, float]:
    """Largest root a_n of G_n on [0, pi] and smallest root b_n on [-pi, 0]."""
    if not r_n > 1:
        raise PreconditionError("r_n must exceed 1")

    def g(t):
        return float(_G(curve, eps, r_n, t))

    grid = np.linspace(0.0, math.pi, SCAN_POINTS)
    vals_pos = _G(curve, eps, r_n, grid)
    vals_neg = _G(curve, eps, r_n, -grid)
    if vals_pos[-1] <= 0 or vals_neg[-1] <= 0:
        raise PreconditionError(f"G_n has no sign change: r_n = {r_n} is too large for this curve")
    i = np.flatnonzero(vals_pos <= 0)[-1]
    a_n = _bisect(g, grid[i], grid[i + 1])
    j = np.flatnonzero(vals_neg <= 0)[-1]
    b_n = -_bisect(lambda t: g(-t), grid[j], grid[j + 1])
    return a_n, b_n


# ---------------------------------------------------------------------------
# decomposition

CASES = ("one", "two", "three")


def case_of(theta: float, a_n: float, b_n: float) -> str:
    if theta >= a_n or theta <= b_n:
        return "one"
    return "two" if theta < 0 else "three"


def case_segments(a_n: float, b_n: float) -> list[tuple[float, float, str]]:
    return [(-math.pi, b_n, "one"), (b_n, 0.0, "two"), (0.0, a_n, "three"), (a_n, math.pi, "one")]


def _angle_nodes(breaks, grid_size: int) -> tuple[np.ndarray, np.ndarray]:
    breaks = sorted(set(float(b) for b in breaks))
    total = breaks[-1] - breaks[0]
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 0:
            continue
        panels = max(1, int(round(grid_size / GL_ORDER * (b - a) / total)))
        x, w = _panel_nodes(a, b, panels)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _check_spectrum(T: np.ndarray) -> np.ndarray:
    ev = np.linalg.eigvals(T)
    mod = np.abs(ev)
    if np.any(mod > 1 + 1e-10):
        raise PreconditionError(f"spectral radius {mod.max()} exceeds 1")
    on = mod > 1 - 1e-10
    if np.any(np.abs(ev[on] - 1.0) > 1e-8):
        raise PreconditionError("eigenvalues on the unit circle other than 1")
    return ev


@dataclass
class CurveDecomposition:
    n: int
    r_n: float
    a_n: float
    b_n: float
    theta_grid: np.ndarray
    weights: np.ndarray
    cases: list
    R_n: np.ndarray
    psd_margin: np.ndarray
    P_norm: np.ndarray
    D_norm: np.ndarray
    residual: np.ndarray
    warnings: list

    @property
    def segments(self):
        return case_segments(self.a_n, self.b_n)

    def min_relative_margin(self) -> float:
        return float(np.min(self.psd_margin / np.maximum(self.P_norm, np.finfo(float).tiny)))

    def psd_ok(self, rtol: float = 1e-9) -> bool:
        return bool(np.all(self.psd_margin >= -rtol * self.P_norm))

    def k_value(self) -> float:
        lam = self.r_n / (2 * math.pi) / self.R_n
        return float(3.0 + 2.0 * np.sum(self.weights * self.D_norm) + 2.0 * np.sum(self.weights * lam))

    def summary(self) -> dict:
        return {
            "n": self.n, "r_n": self.r_n, "a_n": self.a_n, "b_n": self.b_n,
            "grid": int(self.theta_grid.size), "K_n": self.k_value(),
            "min_psd_margin": float(self.psd_margin.min()),
            "min_relative_psd_margin": self.min_relative_margin(),
            "psd_ok": self.psd_ok(), "max_residual": float(self.residual.max()),
            "warnings": self.warnings,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "case", "Rn", "psd_margin", "D_norm"])
        for row in zip(self.theta_grid, self.cases, self.R_n, self.psd_margin, self.D_norm):
            w.writerow([repr(float(row[0])), row[1], repr(float(row[2])), repr(float(row[3])),
                        repr(float(row[4]))])
        return buf.getvalue()


def _estimate_ratio(T: np.ndarray, lam: complex, eps: EpsilonProfile) -> float:
    x = abs(lam) - 1.0
    return resolvent_norm(T, lam) * x / (1.0 + eps(x))


def _sample_curve_set(curve: VTypeCurve, angles: int = 64, radii: int = 8) -> np.ndarray:
    top = 1.0 + curve.nu
    th = np.linspace(-curve.delta_minus, curve.delta_plus, angles)
    pts = []
    for t in th:
        lo = curve.r(t)
        for rad in np.linspace(lo, top, radii):
            if rad > 1.0:
                pts.append(rad * np.exp(1j * t))
    return np.array(pts)


def decompose(T, curve: VTypeCurve, eps: EpsilonProfile, n: int, grid_size: int = 2048) -> CurveDecomposition:
    """Split mu + (r_n/2pi) R_n^{-1} into a positive part P_n and a remainder D_n on an angle grid."""
    T = as_matrix(T, square=True).astype(complex)
    _check_spectrum(T)
    r_n = circle_radius(curve, eps, n)
    a_n, b_n = solve_angles(curve, eps, r_n)
    breaks = [-math.pi, b_n, 0.0, a_n, math.pi]
    breaks += [d for d in (-curve.delta_minus, curve.delta_plus) if b_n < -d or d > a_n]
    theta, weights = _angle_nodes(breaks, grid_size)
    dim = T.shape[0]
    eye = np.eye(dim)
    x_a, x_b = curve.excess(a_n), curve.excess(b_n)
    scale = r_n / (2 * math.pi)

    cases, Rn, margin, Pn, Dn, resid = [], [], [], [], [], []
    worst = (None, 0.0)
    for t in theta:
        case = case_of(t, a_n, b_n)
        x = curve.excess(t) if case == "one" else (x_b if case == "two" else x_a)
        rad = 1.0 + x
        R = rad - r_n
        e = complex(math.cos(t), math.sin(t))
        Cpt = rad * e
        try:
            Ainv = np.linalg.inv(r_n * e * eye - T)
            B = T - Cpt * eye
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SingularityError("singular factor in the decomposition", z=Cpt, theta=float(t)) from exc
        M = Ainv @ B
        MM = M @ M.conj().T
        Bsq = Binv @ Binv.conj().T
        top = (1.0 + eps(x)) ** 2 / x ** 2 if case == "one" else 1.0 / R ** 2
        P = scale * R * (M @ (top * eye - Bsq) @ M.conj().T)
        P = 0.5 * (P + P.conj().T)
        if case == "one":
            D = scale * R * (1.0 / R ** 2 - top) * MM
        else:
            D = np.zeros_like(P)
        mu = mu_dlp(T, r_n, t)
        resid.append(op_norm(mu + (scale / R) * eye - P - D))
        margin.append(min_eig_hermitian(P))
        Pn.append(op_norm(P))
        Dn.append(op_norm(D))
        Rn.append(R)
        cases.append(case)
        ratio = float(sla.svdvals(Binv)[0]) * x / (1.0 + eps(x))
        if ratio > worst[1]:
            worst = (Cpt, ratio)
    for lam in _sample_curve_set(curve):
        if abs(lam - 1.0) < 1e-12:
            continue
        ratio = _estimate_ratio(T, lam, eps)
        if ratio > worst[1]:
            worst = (lam, ratio)
    warnings = []
    if worst[1] > 1 + 1e-9:
        warnings.append({"n": n, "message": "resolvent estimate violated on the sampled set",
                         "lambda": [worst[0].real, worst[0].imag], "ratio": worst[1]})
    return CurveDecomposition(n=n, r_n=r_n, a_n=a_n, b_n=b_n, theta_grid=theta, weights=weights,
                              cases=cases, R_n=np.array(Rn), psd_margin=np.array(margin),
                              P_norm=np.array(Pn), D_norm=np.array(Dn), residual=np.array(resid),
                              warnings=warnings)


@dataclass
class KCertificate:
    K: float
    per_n: list
    warnings: list

    @property
    def trend(self) -> str:
        ks = [row["K_n"] for row in self.per_n]
        if len(ks) < 2:
            return "single"
        if all(b >= a for a, b in zip(ks, ks[1:])):
            return "nondecreasing"
        if all(b <= a for a, b in zip(ks, ks[1:])):
            return "nonincreasing"
        return "mixed"

    def to_dict(self) -> dict:
        return {"K": self.K, "per_n": self.per_n, "warnings": self.warnings, "trend": self.trend}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def k_spectral_estimate(T, curve: VTypeCurve, eps: EpsilonProfile, n_list=(1, 2, 3, 4),
                        grid_size: int = 2048, keep: list | None = None) -> KCertificate:
    """K_n = 3 + 2 int ‖D_n‖ + 2 int (r_n/2pi) R_n^{-1} for each n, and their maximum."""
    per_n, warnings = [], []
    for n in n_list:
        dec = decompose(T, curve, eps, int(n), grid_size)
        if keep is not None:
            keep.append(dec)
        per_n.append(dec.summary())
        warnings.extend(dec.warnings)
    return KCertificate(K=max(row["K_n"] for row in per_n), per_n=per_n, warnings=warnings)


def verify_k_spectral(T, K: float, r_n: float, trials: int = 200, seed: int = 0,
                      max_degree: int = 16, check: bool = True) -> float:
    """max over random polynomials of ‖p(T)‖ / sup_{|z|=r_n} |p(z)|."""
    T = as_matrix(T, square=True).astype(complex)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(trials):
        deg = int(rng.integers(0, max_degree + 1))
        coeffs = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        best = max(best, op_norm(poly_eval(coeffs, T)) / sup_on_circle(coeffs, r_n))
    if check and best > K * (1 + 1e-6):
        raise ClaimViolation(f"polynomial ratio {best} exceeds K = {K}", value=best, bound=K)
    return best


# ---------------------------------------------------------------------------
# hypothesis integral, circle constant, catalog operator

def _peripheral(T: np.ndarray) -> bool:
    ev = _check_spectrum(T)
    near = np.abs(ev - 1.0) < 1e-8
    if near.sum() > 1:
        raise PreconditionError("1 is a multiple eigenvalue")
    return bool(near.any())


def hypothesis_integral(T, curve: VTypeCurve, eps: EpsilonProfile, notch: float = 1e-10) -> dict:
    """int eps(r-1)/(r-1) ‖(e^{i theta} - T)^{-1}‖^2 over [-delta_-, delta_+].

    Evaluated on [eta, delta] per side (log-spaced panels) for a decreasing
    sequence of cut-offs eta ending at ``notch`` when 1 is an eigenvalue;
    convergence is judged from the increments between cut-offs.
    """
    T = as_matrix(T, square=True).astype(complex)
    touches = _peripheral(T)
    etas = [notch * 1e4, notch * 1e2, notch] if touches else [1e-8, 1e-12, 1e-16]

    def integrand(theta):
        out = np.empty_like(theta)
        for i, t in enumerate(theta):
            x = curve.excess(t)
            ex = eps(x)
            out[i] = 0.0 if ex == 0 else ex / x * resolvent_norm(T, complex(math.cos(t), math.sin(t))) ** 2
        return out

    def side(sgn: int, d: float, eta: float) -> float:
        lo, hi = math.log(eta), math.log(d)

        def quad(panels):
            u, w = _panel_nodes(lo, hi, panels)
            th = np.exp(u)
            return float(np.sum(integrand(sgn * th) * th * w))

        return _refined(quad, start=max(4, int(hi - lo)), max_doublings=4, atol=1e-10)[0]

    values = [side(1, curve.delta_plus, eta) + side(-1, curve.delta_minus, eta) for eta in etas]
    d1, d2 = values[1] - values[0], values[2] - values[1]
    converged = d2 <= QUAD_ATOL + 1e-9 * abs(values[2]) or (d2 <= 0.5 * d1 and d2 <= 1e-3 * max(1.0, values[2]))
    return {"value": values[-1], "converged": bool(converged), "cutoffs": etas, "values": values,
            "peripheral_eigenvalue": touches}


def ritt_resolvent_check(T, grid: int = 4096) -> float:
    """sup over a theta-grid of |theta| ‖(e^{i theta} - T)^{-1}‖ (theta = 0 excluded)."""
    T = as_matrix(T, square=True)
    uni = np.linspace(-math.pi, math.pi, grid + 1)
    near = np.logspace(-8, 0, 200)
    theta = np.concatenate([uni[uni != 0], near, -near])
    best = 0.0
    for t in theta:
        best = max(best, abs(t) * resolvent_norm(T, complex(math.cos(t), math.sin(t))))
    return best


def ritt_test(N: int, cond: float, seed: int = 0) -> np.ndarray:
    """V diag(1, 1-1/N, ..., 1/N) V^{-1} with cond(V) = cond.

    The eigenvector for 1 is orthogonal to the others, so the spectral
    projection at 1 has norm one; the remaining eigenvectors are mixed by a
    random matrix with singular values spread geometrically over [1, cond].
    """
    if N < 2 or not cond >= 1:
        raise InputError("need N >= 2 and cond >= 1")
    rng = np.random.default_rng(seed)
    d = 1.0 - np.arange(N) / N
    Q = haar_unitary(N, rng, real=True)
    U = haar_unitary(N - 1, rng, real=True)
    W = haar_unitary(N - 1, rng, real=True)
    inner = (U * np.geomspace(1.0, cond, N - 1)) @ W
    V = Q @ sla.block_diag(1.0, inner)
    return np.linalg.solve(V.T, (V * d).T).T
