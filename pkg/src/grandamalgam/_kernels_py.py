"""Pure-numpy implementation of the evaluation kernels.

Selected at import time by :mod:`grandamalgam.kernels` when the compiled
extension is unavailable (or forced via ``GRANDAMALGAM_BACKEND=python``).
Semantics must match ``_kernels_cy`` bit-for-bit in structure: same postfix
interpretation, same clamping of the regularized path.
"""

from __future__ import annotations

import numpy as np

from ._program import (
    OP_CONST,
    OP_INDICATOR,
    OP_POWER,
    OP_PRODUCT,
    OP_SCALE,
    OP_SUM,
    OP_TRUNC,
)

BACKEND = "python"


def eval_program(ops: np.ndarray, args: np.ndarray, u: np.ndarray) -> np.ndarray:
    stack: list = []
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for i in range(len(ops)):
            op = ops[i]
            a0, a1, a2 = args[i]
            if op == OP_CONST:
                stack.append(np.full_like(u, a0))
            elif op == OP_POWER:
                stack.append(a0 * np.abs(u + a1) ** a2)
            elif op == OP_INDICATOR:
                stack.append(((u >= a0) & (u <= a1)).astype(np.float64))
            elif op == OP_SUM:
                k = int(a0)
                acc = stack[-k]
                for item in stack[-k + 1:] if k > 1 else []:
                    acc = acc + item
                del stack[-k:]
                stack.append(acc)
            elif op == OP_PRODUCT:
                k = int(a0)
                acc = stack[-k]
                for item in stack[-k + 1:] if k > 1 else []:
                    acc = acc * item
                del stack[-k:]
                stack.append(acc)
            elif op == OP_SCALE:
                stack.append(a0 * stack.pop())
            elif op == OP_TRUNC:
                stack.append(np.minimum(np.abs(stack.pop()), a0))
            else:
                raise ValueError(f"bad opcode {op}")
    return stack.pop()


def weighted_pow_sums(
    ops: np.ndarray,
    args: np.ndarray,
    u: np.ndarray,
    w: np.ndarray,
    rs: np.ndarray,
) -> np.ndarray:
    """``out[j] = sum_i w[i] * |f(u[i])| ** rs[j]``."""
    v = np.abs(eval_program(ops, args, u))
    with np.errstate(over="ignore", invalid="ignore"):
        powers = v[None, :] ** rs[:, None]
        return powers @ w


def regularized_pow_sums(
    ops: np.ndarray,
    args: np.ndarray,
    u_eval: np.ndarray,
    log_u: np.ndarray,
    log_w: np.ndarray,
    rs: np.ndarray,
    alpha: float,
) -> np.ndarray:
    """Singular-layer sums ``out[j] = sum_i exp(log_w[i] + alpha*r*log_u[i])
    * (|f(u_eval[i])| * u_eval[i]**(-alpha)) ** r`` for ``r = rs[j]``.

    The regularized factor ``|f(u)| * u^(-alpha)`` is bounded near a singular
    endpoint of lead exponent ``alpha``, so the only large scales live in the
    exponential, where they are handled in log space.
    """
    h = np.abs(eval_program(ops, args, u_eval))
    with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
        if alpha != 0.0:
            h = h * u_eval ** (-alpha)
        hp = h[None, :] ** rs[:, None]
        ex = np.exp(log_w[None, :] + np.outer(alpha * rs, log_u))
        return np.einsum("ji,ji->j", hp, ex)
