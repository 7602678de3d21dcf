"""Kernel dispatch: the compiled extension when available, else pure Python.

Set KREISSLAB_PURE=1 to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("KREISSLAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

corner_row = _impl.corner_row
weight_chain = _impl.weight_chain
chain_derivative = _impl.chain_derivative
log_inv_sqrt_series = _impl.log_inv_sqrt_series
eps_scan = _impl.eps_scan
abs_cesaro_step = _impl.abs_cesaro_step

__all__ = [
    "BACKEND",
    "corner_row",
    "weight_chain",
    "chain_derivative",
    "log_inv_sqrt_series",
    "eps_scan",
    "abs_cesaro_step",
]
