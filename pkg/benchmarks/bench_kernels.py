"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-N time for each backend, the
speedup and the max relative difference between the two outputs.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg  # noqa: F401

from kreisslab import _kernels_py as pure

try:
    from kreisslab import _kernels as compiled
except ImportError:
    compiled = None


def cases():
    rng = np.random.default_rng(0)
    s = 0.1 * rng.random(20000)
    ell = np.log1p(1.0 / np.arange(1, 400))
    cL = 0.3 / np.sqrt(np.log(np.arange(2, 200002.0)))
    A = sp.random(512, 512, density=0.01, random_state=1, format="csr")
    A = A / sp.linalg.norm(A, 1)
    AH = A.T.tocsr()
    x = rng.standard_normal(512)
    return [
        ("corner_row m=3", "corner_row", (s, 3)),
        ("weight_chain m=2", "weight_chain", (s[:4000], 2)),
        ("chain_derivative p=2", "chain_derivative", (ell, 0.05, 2)),
        ("log_inv_sqrt_series a=0.9999", "log_inv_sqrt_series", (0.9999,)),
        ("eps_scan 2e5", "eps_scan", (cL, 2, 1e-5)),
        ("abs_cesaro_step n=64", "abs_cesaro_step", (A, AH, x, 64)),
    ]


def _diff(a, b) -> float:
    if isinstance(a, tuple):
        return max(_diff(u, v) for u, v in zip(a, b))
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the pure backend is available")
    print(f"{'kernel':32s} {'pure [ms]':>12s} {'cython [ms]':>12s} {'speedup':>9s} {'rel diff':>10s}")
    for label, name, argv in cases():
        f_pure = getattr(pure, name)
        t_pure = min(timeit.repeat(lambda: f_pure(*argv), number=1, repeat=args.repeat))
        if compiled is None:
            print(f"{label:32s} {1e3 * t_pure:12.3f}")
            continue
        f_comp = getattr(compiled, name)
        t_comp = min(timeit.repeat(lambda: f_comp(*argv), number=1, repeat=args.repeat))
        d = _diff(f_pure(*argv), f_comp(*argv))
        print(f"{label:32s} {1e3 * t_pure:12.3f} {1e3 * t_comp:12.3f} {t_pure / t_comp:9.1f} {d:10.2e}")


if __name__ == "__main__":
    main()
