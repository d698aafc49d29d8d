"""Function expressions on a finite interval with Lebesgue measure.

The function corpus handled by this library is a small closed-form algebra:
powers ``c*|t - t0|^a`` (singularities allowed only at interval endpoints),
indicators of subintervals, sums, products, scalar multiples and truncations
``min(|f|, n)``.  Expressions are immutable trees; everything downstream
(quadrature, norms, verification) works on this representation.

Two views of an expression exist:

* recursive scalar evaluation (:func:`evaluate`), used for samples and exports;
* a flattened postfix :class:`Program` interpreted by the numeric kernels,
  used on quadrature nodes.  Programs are compiled in a shifted coordinate
  ``t = base + direction * u`` so that a singular endpoint can be placed at
  ``u = 0`` and distances to it are formed without cancellation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

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


class ExpressionError(ValueError):
    """Malformed expression or an operation outside its domain."""


class SingularPointError(ExpressionError):
    """Pointwise evaluation requested exactly at a singular point."""


@dataclass(frozen=True)
class MeasureSpace:
    """Open interval ``(lower, upper)`` carrying Lebesgue measure."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ExpressionError("interval endpoints must be finite")
        if not self.lower < self.upper:
            raise ExpressionError("interval must satisfy lower < upper")

    @property
    def mass(self) -> float:
        return self.upper - self.lower

    def contains(self, t: float) -> bool:
        return self.lower < t < self.upper


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Power:
    """``coeff * |t - center| ** exponent``.

    A negative exponent makes the center a singular point; such centers must
    sit at an endpoint of the ambient interval (checked by
    :func:`validate_on`), matching the endpoint-singular corpus this library
    supports.
    """

    coeff: float
    center: float
    exponent: float


@dataclass(frozen=True)
class Indicator:
    """Characteristic function of ``[lower, upper)``."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise ExpressionError("indicator needs lower < upper")


@dataclass(frozen=True)
class Sum:
    terms: tuple

    def __post_init__(self) -> None:
        if not self.terms:
            raise ExpressionError("empty sum")
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __post_init__(self) -> None:
        if not self.factors:
            raise ExpressionError("empty product")
        object.__setattr__(self, "factors", tuple(self.factors))


@dataclass(frozen=True)
class Scale:
    factor: float
    expr: "FunctionExpr"


@dataclass(frozen=True)
class TruncateAbove:
    """Pointwise ``min(|expr(t)|, level)`` — nonnegative by construction."""

    level: float
    expr: "FunctionExpr"

    def __post_init__(self) -> None:
        if not self.level >= 0:
            raise ExpressionError("truncation level must be >= 0")


FunctionExpr = Union[Constant, Power, Indicator, Sum, Product, Scale, TruncateAbove]


def validate_on(expr: FunctionExpr, omega: MeasureSpace) -> None:
    """Check the endpoint-singularity and clipping invariants on ``omega``."""
    if isinstance(expr, Power):
        if expr.exponent < 0 and expr.coeff != 0.0:
            if expr.center not in (omega.lower, omega.upper):
                raise ExpressionError(
                    "negative-exponent power must be centered at an interval endpoint"
                )
    elif isinstance(expr, Indicator):
        if expr.upper <= omega.lower or expr.lower >= omega.upper:
            raise ExpressionError("indicator support lies outside the interval")
    elif isinstance(expr, Sum):
        for term in expr.terms:
            validate_on(term, omega)
    elif isinstance(expr, Product):
        for factor in expr.factors:
            validate_on(factor, omega)
    elif isinstance(expr, (Scale, TruncateAbove)):
        validate_on(expr.expr, omega)


def evaluate(expr: FunctionExpr, t: float) -> float:
    """Pointwise value at ``t``; raises :class:`SingularPointError` at a
    singular center of a negative-exponent power."""
    if isinstance(expr, Constant):
        return expr.value
    if isinstance(expr, Power):
        d = abs(t - expr.center)
        if d == 0.0:
            if expr.exponent < 0:
                if expr.coeff == 0.0:
                    return 0.0
                raise SingularPointError(f"singular point at t={t}")
            if expr.exponent == 0:
                return expr.coeff
            return 0.0
        return expr.coeff * d ** expr.exponent
    if isinstance(expr, Indicator):
        return 1.0 if expr.lower <= t < expr.upper else 0.0
    if isinstance(expr, Sum):
        return sum(evaluate(term, t) for term in expr.terms)
    if isinstance(expr, Product):
        out = 1.0
        for factor in expr.factors:
            out *= evaluate(factor, t)
        return out
    if isinstance(expr, Scale):
        return expr.factor * evaluate(expr.expr, t)
    if isinstance(expr, TruncateAbove):
        return min(abs(evaluate(expr.expr, t)), expr.level)
    raise ExpressionError(f"unknown node {expr!r}")


# ---------------------------------------------------------------------------
# JSON serialization (schema shipped in data/function_expr.schema.json)

def to_json_dict(expr: FunctionExpr) -> dict:
    if isinstance(expr, Constant):
        return {"kind": "constant", "value": expr.value}
    if isinstance(expr, Power):
        return {
            "kind": "power",
            "coeff": expr.coeff,
            "center": expr.center,
            "exponent": expr.exponent,
        }
    if isinstance(expr, Indicator):
        return {"kind": "indicator", "lower": expr.lower, "upper": expr.upper}
    if isinstance(expr, Sum):
        return {"kind": "sum", "terms": [to_json_dict(t) for t in expr.terms]}
    if isinstance(expr, Product):
        return {"kind": "product", "factors": [to_json_dict(f) for f in expr.factors]}
    if isinstance(expr, Scale):
        return {"kind": "scale", "factor": expr.factor, "expr": to_json_dict(expr.expr)}
    if isinstance(expr, TruncateAbove):
        return {
            "kind": "truncate_above",
            "level": expr.level,
            "expr": to_json_dict(expr.expr),
        }
    raise ExpressionError(f"unknown node {expr!r}")


def from_json_dict(data: dict) -> FunctionExpr:
    try:
        kind = data["kind"]
    except (TypeError, KeyError) as exc:
        raise ExpressionError("expression node needs a 'kind' tag") from exc
    if kind == "constant":
        return Constant(float(data["value"]))
    if kind == "power":
        return Power(float(data["coeff"]), float(data["center"]), float(data["exponent"]))
    if kind == "indicator":
        return Indicator(float(data["lower"]), float(data["upper"]))
    if kind == "sum":
        return Sum(tuple(from_json_dict(t) for t in data["terms"]))
    if kind == "product":
        return Product(tuple(from_json_dict(f) for f in data["factors"]))
    if kind == "scale":
        return Scale(float(data["factor"]), from_json_dict(data["expr"]))
    if kind == "truncate_above":
        return TruncateAbove(float(data["level"]), from_json_dict(data["expr"]))
    raise ExpressionError(f"unknown expression kind {kind!r}")


def dumps(expr: FunctionExpr) -> str:
    return json.dumps(to_json_dict(expr), sort_keys=True)


def loads(text: str) -> FunctionExpr:
    return from_json_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Structural analysis

def lead_exponent(expr: FunctionExpr, point: float, inward: float) -> Optional[float]:
    """Growth exponent of ``|expr|`` approaching ``point`` from the ``inward``
    direction: ``|expr(t)| ~ C * |t - point|^gamma``.

    Returns None when the expression vanishes identically near the point.
    Sums take the most singular (smallest) exponent of their terms; possible
    cancellations between equally singular terms are deliberately ignored, so
    the result is a conservative lower bound used for divergence decisions.
    """
    if isinstance(expr, Constant):
        return None if expr.value == 0.0 else 0.0
    if isinstance(expr, Power):
        if expr.coeff == 0.0:
            return None
        return expr.exponent if expr.center == point else 0.0
    if isinstance(expr, Indicator):
        if inward > 0:
            return 0.0 if expr.lower <= point < expr.upper else None
        return 0.0 if expr.lower < point <= expr.upper else None
    if isinstance(expr, Sum):
        exps = [lead_exponent(t, point, inward) for t in expr.terms]
        exps = [e for e in exps if e is not None]
        return min(exps) if exps else None
    if isinstance(expr, Product):
        exps = [lead_exponent(f, point, inward) for f in expr.factors]
        if any(e is None for e in exps):
            return None
        return sum(exps)
    if isinstance(expr, Scale):
        if expr.factor == 0.0:
            return None
        return lead_exponent(expr.expr, point, inward)
    if isinstance(expr, TruncateAbove):
        if expr.level == 0.0:
            return None
        e = lead_exponent(expr.expr, point, inward)
        if e is None:
            return None
        return max(e, 0.0)
    raise ExpressionError(f"unknown node {expr!r}")


def is_bounded_on(expr: FunctionExpr, a: float, b: float) -> bool:
    """True when ``|expr|`` is bounded on the open window ``(a, b)``.

    Singularities can only sit at window edges (endpoint-singular corpus), so
    boundedness reduces to nonnegative lead exponents there.
    """
    for point, inward in ((a, 1.0), (b, -1.0)):
        e = lead_exponent(expr, point, inward)
        if e is not None and e < 0:
            return False
    return True


def breakpoints(expr: FunctionExpr, a: float, b: float) -> list:
    """Interior points of ``(a, b)`` where the expression is non-smooth:
    indicator edges, power centers and truncation crossings of monomial
    arguments.  Crossings of non-monomial truncations are not enumerable from
    the tree; adaptive quadrature absorbs those kinks instead."""
    points: set = set()

    def visit(node: FunctionExpr) -> None:
        if isinstance(node, Indicator):
            points.add(node.lower)
            points.add(node.upper)
        elif isinstance(node, Power):
            points.add(node.center)
        elif isinstance(node, Sum):
            for t in node.terms:
                visit(t)
        elif isinstance(node, Product):
            for f in node.factors:
                visit(f)
        elif isinstance(node, Scale):
            visit(node.expr)
        elif isinstance(node, TruncateAbove):
            visit(node.expr)
            mono = as_monomial(node.expr)
            if mono is not None and node.level > 0:
                coeff, center, alpha, _ = mono
                if coeff != 0.0 and alpha != 0.0:
                    d = (node.level / abs(coeff)) ** (1.0 / alpha)
                    points.add(center + d)
                    points.add(center - d)

    visit(expr)
    return sorted(p for p in points if a < p < b)


def as_monomial(expr: FunctionExpr, window: Optional[tuple] = None):
    """Reduce to ``coeff * |t - center|^alpha`` on an effective window.

    Returns ``(coeff, center, alpha, effective_window)`` or None when no such
    reduction exists.  Handles constants, powers, scales, indicators (window
    clipping) and products whose power factors share one center.  ``window``
    defaults to the whole line; a clipped-empty window comes back with
    ``coeff = 0``.
    """
    win = window if window is not None else (-math.inf, math.inf)

    if isinstance(expr, Constant):
        return (expr.value, 0.0, 0.0, win)
    if isinstance(expr, Power):
        if expr.exponent == 0.0:
            return (expr.coeff, 0.0, 0.0, win)
        return (expr.coeff, expr.center, expr.exponent, win)
    if isinstance(expr, Indicator):
        lo, hi = max(win[0], expr.lower), min(win[1], expr.upper)
        if lo >= hi:
            return (0.0, 0.0, 0.0, (win[0], win[0]))
        return (1.0, 0.0, 0.0, (lo, hi))
    if isinstance(expr, Scale):
        inner = as_monomial(expr.expr, win)
        if inner is None:
            return None
        c, t0, alpha, w = inner
        return (expr.factor * c, t0, alpha, w)
    if isinstance(expr, Product):
        coeff, center, alpha = 1.0, None, 0.0
        w = win
        for factor in expr.factors:
            inner = as_monomial(factor, w)
            if inner is None:
                return None
            c, t0, a, w = inner
            coeff *= c
            if a != 0.0:
                if center is None or center == t0:
                    center = t0
                    alpha += a
                else:
                    return None
        return (coeff, center if center is not None else 0.0, alpha, w)
    if isinstance(expr, Sum):
        if len(expr.terms) == 1:
            return as_monomial(expr.terms[0], win)
        return None
    return None


def sup_abs(expr: FunctionExpr, a: float, b: float, samples: int = 2049) -> float:
    """Supremum of ``|expr|`` over ``(a, b)``, estimated on a dense grid plus
    the structural breakpoints.  Exact edges are probed from a small inset so
    bounded-at-the-edge functions are sampled safely."""
    if not b > a:
        return 0.0
    pts = list(np.linspace(a, b, samples))
    inset = (b - a) * 1e-9
    pts[0] = a + inset
    pts[-1] = b - inset
    for p in breakpoints(expr, a, b):
        pts.extend([p - inset, p + inset])
    prog = compile_program(expr, base=0.0, direction=1.0)
    vals = np.abs(eval_program_values(prog, np.asarray(sorted(pts))))
    return float(np.max(vals))


# ---------------------------------------------------------------------------
# Program compilation for the numeric kernels

@dataclass(frozen=True)
class Program:
    """Flattened postfix form of an expression in shifted coordinates."""

    ops: np.ndarray
    args: np.ndarray
    stack_need: int


def compile_program(expr: FunctionExpr, base: float, direction: float) -> Program:
    """Compile for evaluation at ``t = base + direction * u`` (direction ±1).

    Power nodes centered at ``base`` evaluate as ``coeff * u**alpha`` exactly,
    which is the whole point: quadrature feeds in small ``u`` offsets from a
    singular endpoint with full relative precision.
    """
    if direction not in (1.0, -1.0):
        raise ExpressionError("direction must be +1 or -1")
    ops: list = []
    args: list = []

    def emit(op: int, a0: float = 0.0, a1: float = 0.0, a2: float = 0.0) -> int:
        ops.append(op)
        args.append((a0, a1, a2))
        return 1

    def visit(node: FunctionExpr) -> int:
        """Emit code, return the stack depth the subtree needs."""
        if isinstance(node, Constant):
            emit(OP_CONST, node.value)
            return 1
        if isinstance(node, Power):
            # |t - center| = |u + direction*(base - center)|
            emit(OP_POWER, node.coeff, direction * (base - node.center), node.exponent)
            return 1
        if isinstance(node, Indicator):
            u0 = (node.lower - base) * direction
            u1 = (node.upper - base) * direction
            emit(OP_INDICATOR, min(u0, u1), max(u0, u1))
            return 1
        if isinstance(node, Sum):
            need = 0
            for i, term in enumerate(node.terms):
                need = max(need, i + visit(term))
            emit(OP_SUM, float(len(node.terms)))
            return need
        if isinstance(node, Product):
            need = 0
            for i, factor in enumerate(node.factors):
                need = max(need, i + visit(factor))
            emit(OP_PRODUCT, float(len(node.factors)))
            return need
        if isinstance(node, Scale):
            need = visit(node.expr)
            emit(OP_SCALE, node.factor)
            return need
        if isinstance(node, TruncateAbove):
            need = visit(node.expr)
            emit(OP_TRUNC, node.level)
            return need
        raise ExpressionError(f"unknown node {node!r}")

    stack_need = visit(expr)
    return Program(
        ops=np.asarray(ops, dtype=np.int32),
        args=np.asarray(args, dtype=np.float64).reshape(len(ops), 3),
        stack_need=stack_need,
    )


def eval_program_values(prog: Program, u: np.ndarray) -> np.ndarray:
    """Evaluate a program on an array of shifted coordinates (numpy path;
    the kernel backends provide the hot equivalents)."""
    from . import kernels

    return kernels.eval_program(prog, np.ascontiguousarray(u, dtype=np.float64))
