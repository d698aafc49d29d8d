"""Scalar sup/inf search used by the exponent sweeps.

The shape of the optimized maps (``eps -> prefactor * norm``) is either
monotone or single-peaked on the corpus, but nothing guarantees that in
general, so the strategy is: dense geometric grid to localize candidates,
then golden-section refinement around every local maximum.  All of it is
deterministic.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def geometric_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n points from lo to hi inclusive, geometrically spaced."""
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    return np.geomspace(lo, hi, n)


def golden_max(fn: Callable[[float], float], a: float, b: float,
               xtol: float, max_iter: int = 200):
    """Golden-section maximization on [a, b]; returns (x, fn(x))."""
    h = b - a
    if h <= xtol:
        x = 0.5 * (a + b)
        return x, fn(x)
    c, d = a + _INVPHI2 * h, a + _INVPHI * h
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if h <= xtol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = fn(d)
    if fc >= fd:
        return c, fc
    return d, fd


def local_maxima_indices(fs: np.ndarray) -> list:
    """Indices of local maxima of a sampled curve, endpoints included."""
    n = len(fs)
    if n == 1:
        return [0]
    out = []
    for i in range(n):
        left = fs[i - 1] if i > 0 else -math.inf
        right = fs[i + 1] if i < n - 1 else -math.inf
        if fs[i] >= left and fs[i] >= right:
            out.append(i)
    return out


def refine_grid_max(fn: Callable[[float], float], xs: np.ndarray, fs: np.ndarray,
                    xtol: float, top_k: int = 3):
    """Polish the best local maxima of a sampled curve with golden section.

    Returns ``(x_best, f_best)``; ``fn`` is the precise evaluator and may
    differ slightly from the sampled values, so grid candidates are
    re-evaluated through it before comparison.
    """
    cand = local_maxima_indices(fs)
    cand.sort(key=lambda i: fs[i], reverse=True)
    best_x, best_f = None, -math.inf
    for i in cand[:top_k]:
        a = xs[i - 1] if i > 0 else xs[i]
        b = xs[i + 1] if i < len(xs) - 1 else xs[i]
        if b > a:
            x, f = golden_max(fn, a, b, xtol)
        else:
            x, f = xs[i], fn(xs[i])
        fx_grid = fn(xs[i])
        if fx_grid > f:
            x, f = xs[i], fx_grid
        if f > best_f:
            best_x, best_f = x, f
    return best_x, best_f


def batched_zoom_max(eval_many: Callable[[np.ndarray], np.ndarray],
                     lo: float, hi: float, n0: int,
                     rounds: int = 4, points: int = 33):
    """Grid maximization with vectorized evaluations only.

    Used where the evaluator is much cheaper on batches (control-curve
    samples): geometric base grid, then ``rounds`` of linear zooms around the
    incumbent.  Returns ``(x_best, f_best)``.
    """
    xs = geometric_grid(lo, hi, n0)
    fs = eval_many(xs)
    i = int(np.argmax(fs))
    best_x, best_f = float(xs[i]), float(fs[i])
    if not math.isfinite(best_f):
        return best_x, best_f
    span_lo = xs[i - 1] if i > 0 else xs[i]
    span_hi = xs[i + 1] if i < len(xs) - 1 else xs[i]
    for _ in range(rounds):
        if not span_hi > span_lo:
            break
        grid = np.linspace(span_lo, span_hi, points)
        vals = eval_many(grid)
        j = int(np.argmax(vals))
        if vals[j] > best_f:
            best_f = float(vals[j])
            best_x = float(grid[j])
        lo_j = grid[j - 1] if j > 0 else grid[j]
        hi_j = grid[j + 1] if j < points - 1 else grid[j]
        span_lo, span_hi = float(lo_j), float(hi_j)
    return best_x, best_f
