"""Finite-dimensional experiments with Kreiss-type conditions, weighted shifts and power growth."""

from __future__ import annotations

__version__ = "0.1.0"

from . import bounds, constants, constructions, counterexamples, dlp, linalg  # noqa: E402
from .errors import (AdmissibilityError, ClaimViolation, InputError, InvariantViolation,  # noqa: E402
                     KreissLabError, PreconditionError, RangeError, ResourceError, SingularityError)
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "__version__", "BACKEND", "bounds", "constants", "constructions", "counterexamples", "dlp",
    "linalg", "KreissLabError", "InputError", "SingularityError", "PreconditionError",
    "ResourceError", "RangeError", "AdmissibilityError", "InvariantViolation", "ClaimViolation",
]
