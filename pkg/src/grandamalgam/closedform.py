"""Exact r-norms for monomial-reducible expressions.

``closed_form_rnorm`` returns ``(integral over window of |f|^r)^(1/r)`` when
``f`` reduces to ``c*|t-t0|^a`` on an effective window (single power,
constant, indicator, or a product of an indicator with one such node), +inf
when the exponent makes the integral diverge at an endpoint inside the
window, and None when no reduction exists (general sums, truncations).
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .expressions import FunctionExpr, MeasureSpace, as_monomial
from .grandnorm import NormOutcome
from .quadrature import PreparedRnorm, clip_window


def closed_form_rnorm(f: FunctionExpr, r: float, omega: MeasureSpace,
                      window) -> Optional[NormOutcome]:
    if r < 1.0:
        raise ValueError("exponent r must be >= 1")
    clipped = clip_window(omega, window)
    if clipped is None:
        return NormOutcome(value=0.0, argmax_eps=None, error_estimate=0.0,
                           path="closed-form")
    a, b = clipped
    mono = as_monomial(f, (a, b))
    if mono is None:
        return None
    prep = PreparedRnorm(f, a, b)
    if prep.kind == "quad":  # pragma: no cover - as_monomial already gated
        return None
    value = float(prep.norms(np.asarray([r]))[0])
    err = 0.0 if math.isinf(value) else 4.0 * abs(value) * np.finfo(float).eps
    return NormOutcome(value=value, argmax_eps=None, error_estimate=err,
                       path="closed-form")
