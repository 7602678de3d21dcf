"""Command line experiment runner.

Every subcommand builds a report dict, prints it as JSON and optionally writes
it (``--out``) plus a plot-ready CSV (``--csv``).  Wall time never enters the
report; it goes to ``<out>.timing.json`` (or stderr) so repeated runs with the
same arguments give byte-identical reports.

Exit codes: 0 success, 1 input or usage error, 2 when a checked inequality
failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, kernels
from .bounds import (c_of_eps, log_kappa, lower_bound_log_m, reports_to_csv,
                     strong_kreiss_growth_table, verify_power_vs_bound)
from .constants import KINDS, SearchOptions, estimate
from .constructions import (ShiftFamilySpec, TruncationSpec, build_truncated_shift, corner_entry,
                            parse_family, weight_product)
from .counterexamples import (BetaSequence, CNSequence, counterexample_powers, epsconversion_ratio,
                              epsilon_of_x, estimate_L, foguel_hankel_norms, make_z_grid,
                              pisier_X_norm, resolvent_envelope_check)
from .dlp import EpsilonProfile, VTypeCurve, k_spectral_estimate, ritt_test, verify_k_spectral
from .errors import ClaimViolation, KreissLabError
from .linalg import load_matrix, matrix_to_dict, op_norm, save_matrix

CLAIM_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def dumps(report: dict) -> str:
    # json emits repr(float), the shortest round-trip form
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def _threads(args) -> int:
    n = args.threads
    if n is None:
        env = os.environ.get("KREISSLAB_THREADS", "")
        n = int(env) if env.strip().isdigit() else 1
    return max(1, int(n))


def _pmap(fn, items, threads: int) -> list:
    """Ordered map; the output never depends on the thread count."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


class Claims:
    def __init__(self):
        self.items: list[dict] = []

    def check(self, name: str, ok: bool, **detail) -> None:
        self.items.append({"name": name, "ok": bool(ok), **detail})

    @property
    def failed(self) -> bool:
        return any(not c["ok"] for c in self.items)


def _options(args) -> SearchOptions:
    opts = SearchOptions(seed=args.seed)
    if args.tol is not None:
        opts.tol = args.tol
    if args.nmax is not None:
        opts.n_max = args.nmax
    if args.grid is not None:
        opts.angles = args.grid
    return opts


def _matrix_from_args(args) -> tuple[np.ndarray, dict]:
    if getattr(args, "matrix", None):
        return load_matrix(args.matrix), {"matrix": args.matrix}
    if getattr(args, "spec", None):
        spec, trunc = parse_family(args.spec)
        if trunc is None:
            raise KreissLabError("the family spec needs N=... here")
        return build_truncated_shift(spec, trunc), {"spec": args.spec}
    raise KreissLabError("give --matrix FILE or --spec FAMILY")


# -- subcommands ---------------------------------------------------------------

def cmd_construct(args, claims: Claims):
    spec, trunc = parse_family(args.spec)
    if trunc is None:
        raise KreissLabError("construct needs N=... in the family spec")
    X = build_truncated_shift(spec, trunc)
    if args.out:
        save_matrix(args.out, X)
    results = {"rows": X.shape[0], "cols": X.shape[1], "variant": spec.variant, "m": spec.m,
               "c": spec.c, "N": trunc.N}
    if not args.out:
        results["matrix"] = matrix_to_dict(X)
    return {"spec": args.spec}, results, None


def cmd_constants(args, claims: Claims):
    A, inputs = _matrix_from_args(args)
    opts = _options(args)
    opts.certify = args.certify
    est = estimate(args.kind, A, opts)
    inputs.update(kind=args.kind, certify=args.certify)
    return inputs, est.to_dict(), None


def cmd_power_growth(args, claims: Claims):
    spec, _ = parse_family(args.spec)
    Ns = args.N

    def row(N):
        P = weight_product(spec, np.arange(2, N + 1))
        out = {"N": N, "power": op_norm(P)}
        if spec.variant == "cesaro":
            out["corner"] = corner_entry(spec, N)
            out["predicted"] = spec.c ** spec.m * math.log(N / spec.m) ** spec.m if N > spec.m else 0.0
            out["ok"] = bool(out["predicted"] <= out["corner"] + CLAIM_TOL
                             and out["corner"] <= out["power"] * (1 + CLAIM_TOL))
        return out

    if spec.variant == "cesaro":
        rows = _pmap(row, Ns, _threads(args))
    else:
        rows = strong_kreiss_growth_table(spec.c, spec.m, Ns, spec.variant)
    for r in rows:
        claims.check(f"power_growth N={r['N']}", r["ok"])
    text = _rows_csv(rows)
    return {"spec": args.spec, "N": Ns}, {"rows": rows}, text


def cmd_bounds_table(args, claims: Claims):
    jobs = [(m, eps, N) for m in args.m for eps in args.eps for N in args.N]

    def one(job):
        m, eps, N = job
        return verify_power_vs_bound(ShiftFamilySpec("cesaro", m, c_of_eps(eps, m)), N, eps)

    reports = _pmap(one, jobs, _threads(args))
    rows = []
    for rep in reports:
        d = rep.to_dict()
        d["c"] = c_of_eps(rep.eps, rep.m)
        d["lower_bound_log_m"], d["lower_bound_valid"] = lower_bound_log_m(rep.N, rep.eps, rep.m)
        d["log_kappa"] = log_kappa(rep.m)
        rows.append(d)
        claims.check(f"chain m={rep.m} eps={rep.eps!r} N={rep.N}", rep.chain_ok)
    inputs = {"m": args.m, "eps": args.eps, "N": args.N}
    return inputs, {"rows": rows}, reports_to_csv(reports)


def cmd_kreiss_scan(args, claims: Claims):
    spec, _ = parse_family(args.spec)
    if args.eps is not None:
        spec = ShiftFamilySpec(spec.variant, spec.m, c_of_eps(args.eps, spec.m))
    opts = _options(args)

    def one(N):
        X = build_truncated_shift(spec, TruncationSpec(N))
        est = estimate(args.kind, X, opts)
        return {"N": N, "lower": est.lower, "upper": est.upper, "upper_method": est.upper_method,
                "witness": est.witness}

    rows = _pmap(one, args.N, _threads(args))
    if args.eps is not None and args.kind == "abs_cesaro" and spec.variant == "cesaro":
        for r in rows:
            claims.check(f"abs_cesaro <= 1+eps N={r['N']}", r["lower"] <= 1 + args.eps + 1e-6,
                         value=r["lower"], bound=1 + args.eps)
    inputs = {"spec": args.spec, "kind": args.kind, "N": args.N, "eps": args.eps, "c": spec.c}
    text = _rows_csv([{k: r[k] for k in ("N", "lower", "upper")} for r in rows])
    return inputs, {"rows": rows}, text


def cmd_dlp_verify(args, claims: Claims):
    if args.matrix:
        T = load_matrix(args.matrix)
        inputs = {"matrix": args.matrix}
    else:
        T = ritt_test(args.dim, args.cond, seed=args.seed)
        inputs = {"ritt_test": {"N": args.dim, "cond": args.cond}}
    curve = VTypeCurve("power_law", beta=args.beta, p=args.p)
    eps = EpsilonProfile("power", eps0=args.eps0, q=args.q)
    grid = args.grid or 2048
    decs: list = []
    cert = k_spectral_estimate(T, curve, eps, args.n, grid_size=grid, keep=decs)
    ratios = []
    for dec, row in zip(decs, cert.per_n):
        ratio = verify_k_spectral(T, row["K_n"], dec.r_n, trials=args.trials, seed=args.seed, check=False)
        ratios.append({"n": dec.n, "max_ratio": ratio, "K_n": row["K_n"]})
        claims.check(f"psd n={dec.n}", dec.psd_ok(CLAIM_TOL), min_relative_margin=dec.min_relative_margin())
        claims.check(f"reassembly n={dec.n}", float(dec.residual.max()) <= CLAIM_TOL,
                     value=float(dec.residual.max()))
        claims.check(f"polynomial ratio n={dec.n}", ratio <= row["K_n"], value=ratio, bound=row["K_n"])
    inputs.update(curve={"kind": "power_law", "beta": args.beta, "p": args.p},
                  eps={"form": "power", "eps0": args.eps0, "q": args.q}, n=args.n, grid=grid,
                  trials=args.trials)
    buf = io.StringIO()
    for i, dec in enumerate(decs):
        lines = dec.to_csv().splitlines()
        if i == 0:
            buf.write("n," + lines[0] + "\n")
        for line in lines[1:]:
            buf.write(f"{dec.n},{line}\n")
    return inputs, {"certificate": cert.to_dict(), "polynomial_check": ratios}, buf.getvalue()


def _cn_from_arg(text: str) -> CNSequence:
    if text == "inv_sqrt_log":
        return CNSequence()
    try:
        with open(text, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise KreissLabError(f"--cN must be inv_sqrt_log or a JSON file: {exc}") from exc
    if isinstance(data, dict):
        return CNSequence("tabulated", int(data.get("N0", 2)), tuple(data["table"]))
    return CNSequence("tabulated", 2, tuple(data))


def _beta_from_arg(text: str) -> BetaSequence:
    if text == "inv_log":
        return BetaSequence()
    try:
        with open(text, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise KreissLabError(f"--beta must be inv_log or a JSON file: {exc}") from exc
    return BetaSequence("tabulated", table=tuple(data))


def cmd_counterexample(args, claims: Claims):
    if args.which == "resolvent":
        return _resolvent(args, claims)
    return _pisier(args, claims)


def _resolvent(args, claims: Claims):
    cn = _cn_from_arg(args.cN)
    side = args.grid or 64
    zs = make_z_grid(side, side)
    threads = _threads(args)
    Ls = _pmap(lambda c: estimate_L(c, tuple(args.N), zs), args.c, threads)
    jobs = [(N, c, est["L"]) for c, est in zip(args.c, Ls) for N in args.N]
    slacks = _pmap(lambda j: resolvent_envelope_check(j[0], j[1], j[2], zs), jobs, threads)
    envelope = []
    for (N, c, L), s in zip(jobs, slacks):
        envelope.append({"N": N, "c": c, "L": L, "worst_slack": s})
        claims.check(f"envelope N={N} c={c!r}", s >= -CLAIM_TOL, value=s)
    powers_N = [1 << k for k in range(4, int(math.log2(args.Nmax)) + 1)]
    powers = counterexample_powers(cn, powers_N)
    inc = all(b["power"] > a["power"] for a, b in zip(powers, powers[1:]))
    claims.check("powers strictly increasing", inc)
    for r in powers:
        claims.check(f"power >= c_N ln N at N={r['N']}", r["power"] >= r["lower"] * (1 - CLAIM_TOL))
    L0 = max(est["L"] for est in Ls)
    eps_rows = [{"x": 10.0 ** -k, "eps": epsilon_of_x(10.0 ** -k, cn, L0)} for k in range(1, 7)]
    inputs = {"c": args.c, "N": args.N, "Nmax": args.Nmax, "cN": args.cN, "grid": side}
    results = {"L": Ls, "envelope": envelope, "powers": powers, "epsilon": eps_rows}
    return inputs, results, _rows_csv(powers)


def _pisier(args, claims: Claims):
    beta = _beta_from_arg(args.beta)
    M = args.M
    nmax = args.nmax or 64
    norms = foguel_hankel_norms(beta, M, nmax)
    bound = 1.0 + np.sqrt(beta.values(np.arange(1, nmax + 1)))
    rows = [{"n": n, "power_norm": float(v), "bound": float(b)}
            for n, v, b in zip(range(1, nmax + 1), norms, bound)]
    for r in rows:
        claims.check(f"power norm n={r['n']}", r["power_norm"] <= r["bound"] + CLAIM_TOL,
                     value=r["power_norm"], bound=r["bound"])
    exact = []
    for n in range(1, min(32, M - 2) + 1):
        mat, closed = pisier_X_norm(beta, n, M)
        exact.append({"n": n, "matrix": mat, "closed": closed})
        claims.check(f"closed form n={n}", abs(mat - closed) <= 1e-10, value=mat, bound=closed)
    ratios = [{"a": a, "ratio": epsconversion_ratio(a)} for a in (0.9, 0.99, 0.999, 0.9999)]
    inputs = {"beta": args.beta, "M": M, "nmax": nmax}
    return inputs, {"power_norms": rows, "closed_form": exact, "epsconversion": ratios}, _rows_csv(rows)


def _rows_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0].keys())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow(["" if r.get(k) is None else (repr(float(r[k])) if isinstance(r[k], (float, np.floating))
                    else str(r[k]).lower() if isinstance(r[k], bool) else r[k]) for k in keys])
    return buf.getvalue()


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the JSON report here")
    common.add_argument("--csv", help="write plot-ready CSV here")
    common.add_argument("--threads", type=int, default=None, help="worker threads (env KREISSLAB_THREADS)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--nmax", type=int, default=None)
    common.add_argument("--grid", type=int, default=None)

    p = _Parser(prog="kreisslab", description="Kreiss-type constants and power growth experiments.")
    p.add_argument("--version", action="version", version=f"kreisslab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("construct", parents=[common], help="build a truncated weighted shift")
    s.add_argument("--spec", required=True, help="e.g. cesaro:m=1,c=0.1,N=8 (--out is the matrix file)")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("constants", parents=[common], help="estimate a Kreiss-type constant")
    s.add_argument("--matrix")
    s.add_argument("--spec")
    s.add_argument("--kind", choices=KINDS, default="kreiss")
    s.add_argument("--certify", action="store_true")
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("power-growth", parents=[common], help="||X^{N-1}|| against the predicted growth")
    s.add_argument("--spec", required=True)
    s.add_argument("--N", type=_int_list, default=[64, 256, 1024, 4096])
    s.set_defaults(func=cmd_power_growth)

    s = sub.add_parser("bounds-table", parents=[common], help="bound <= corner <= power chain")
    s.add_argument("--m", type=_int_list, default=[1])
    s.add_argument("--eps", type=_float_list, default=[1.0])
    s.add_argument("--N", type=_int_list, default=[64, 256])
    s.set_defaults(func=cmd_bounds_table)

    s = sub.add_parser("kreiss-scan", parents=[common], help="a constant across truncation sizes")
    s.add_argument("--spec", required=True)
    s.add_argument("--kind", choices=KINDS, default="kreiss")
    s.add_argument("--N", type=_int_list, default=[16, 32, 64])
    s.add_argument("--eps", type=float, default=None, help="set c = c_of_eps(eps, m)")
    s.set_defaults(func=cmd_kreiss_scan)

    s = sub.add_parser("dlp-verify", parents=[common], help="positivity and K-spectral certificate")
    s.add_argument("--matrix")
    s.add_argument("--dim", type=int, default=32)
    s.add_argument("--cond", type=float, default=10.0)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--p", type=float, default=0.5)
    s.add_argument("--eps0", type=float, default=0.5)
    s.add_argument("--q", type=float, default=1.0)
    s.add_argument("--n", type=_int_list, default=[1, 2, 3, 4])
    s.add_argument("--trials", type=int, default=200)
    s.set_defaults(func=cmd_dlp_verify)

    s = sub.add_parser("counterexample", help="resolvent and Foguel-Hankel counterexamples")
    cs = s.add_subparsers(dest="which", required=True, parser_class=_Parser)
    r = cs.add_parser("resolvent", parents=[common])
    r.add_argument("--Nmax", type=int, default=1024)
    r.add_argument("--cN", default="inv_sqrt_log", help="inv_sqrt_log or a JSON table file")
    r.add_argument("--c", type=_float_list, default=[0.05])
    r.add_argument("--N", type=_int_list, default=[64])
    r.set_defaults(func=cmd_counterexample)
    q = cs.add_parser("pisier", parents=[common])
    q.add_argument("--beta", default="inv_log", help="inv_log or a JSON table file")
    q.add_argument("--M", type=int, default=256)
    q.set_defaults(func=cmd_counterexample)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    t0 = time.perf_counter()
    claims = Claims()
    try:
        inputs, results, csv_text = args.func(args, claims)
    except ClaimViolation as exc:
        print(f"claim violated: {exc}", file=sys.stderr)
        return 2
    except (KreissLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    command = args.command if args.command != "counterexample" else f"counterexample {args.which}"
    report = {
        "command": command,
        "inputs": inputs,
        "results": results,
        "claims": claims.items,
        "provenance": {"seed": args.seed, "tol": args.tol, "version": __version__,
                       "backend": kernels.BACKEND},
    }
    text = dumps(report)
    timing = json.dumps({"wall_seconds": time.perf_counter() - t0}) + "\n"
    try:
        if args.out and args.command != "construct":
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
            with open(args.out + ".timing.json", "w", encoding="utf-8") as fh:
                fh.write(timing)
        else:
            sys.stderr.write(timing)
        if args.csv and csv_text is not None:
            with open(args.csv, "w", encoding="utf-8") as fh:
                fh.write(csv_text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(text)
    return 2 if claims.failed else 0


def main() -> None:
    sys.exit(run())
