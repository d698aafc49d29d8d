"""Kernel backend selection: compiled extension first, numpy fallback second.

``GRANDAMALGAM_BACKEND`` forces a choice: ``cython`` (raise if missing),
``python`` (skip the extension).  All callers go through the thin wrappers
here so the two backends stay interchangeable.
"""

from __future__ import annotations

import os

import numpy as np

from .expressions import Program

_requested = os.environ.get("GRANDAMALGAM_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _kernels_py as _impl
elif _requested == "cython":
    from . import _kernels_cy as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as _impl  # type: ignore[no-redef]


def backend_name() -> str:
    return _impl.BACKEND


def eval_program(prog: Program, u: np.ndarray) -> np.ndarray:
    u = np.ascontiguousarray(u, dtype=np.float64)
    return np.asarray(_impl.eval_program(prog.ops, prog.args, u))


def weighted_pow_sums(prog: Program, u: np.ndarray, w: np.ndarray, rs: np.ndarray) -> np.ndarray:
    u = np.ascontiguousarray(u, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    rs = np.ascontiguousarray(rs, dtype=np.float64)
    return np.asarray(_impl.weighted_pow_sums(prog.ops, prog.args, u, w, rs))


def regularized_pow_sums(
    prog: Program,
    u_eval: np.ndarray,
    log_u: np.ndarray,
    log_w: np.ndarray,
    rs: np.ndarray,
    alpha: float,
) -> np.ndarray:
    u_eval = np.ascontiguousarray(u_eval, dtype=np.float64)
    log_u = np.ascontiguousarray(log_u, dtype=np.float64)
    log_w = np.ascontiguousarray(log_w, dtype=np.float64)
    rs = np.ascontiguousarray(rs, dtype=np.float64)
    return np.asarray(
        _impl.regularized_pow_sums(prog.ops, prog.args, u_eval, log_u, log_w, rs, float(alpha))
    )
