"""Small-space upper bounds, Hoelder pairings, and associate-norm brackets.

The small-norm side is certified one-way: any explicit decomposition
``g = sum g_k`` upper-bounds the decomposition infimum, and the composition
of window-wise small bounds with an outer small bound on the sampled curve
upper-bounds the conjugate-amalgam norm.  Lower bounds come from pairing
probes through the duality integral.  The reported bracket
``[probe lower bound, composite upper bound]`` is honest; the true associate
norm is not computed.

Pairing normalization: with the full-sweep translation domain, integrating
the window pairings over x counts every point of the interval with weight
exactly ``width(Q)``, so the duality chain reads

    integral |f g|  <=  amalgam(f) * dual_upper(g) / width(Q).

The ``1/width`` factor is part of the certified bound and is 1 for the
window-equals-interval configuration the verification suite uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .amalgam import Window, amalgam_norm, simpson_weights
from .expressions import (
    Constant,
    FunctionExpr,
    Indicator,
    MeasureSpace,
    Power,
    Product,
    Sum,
    compile_program,
    is_bounded_on,
)
from .grandnorm import (
    GrandExponent,
    NormOutcome,
    UnboundedIntegrandError,
    eps_grid,
    eps_inf_conjugate,
    get_prepared,
)
from .optimize import golden_max, local_maxima_indices
from . import kernels
from .quadrature import DEFAULT_REL_TOL, clip_window, divergence_threshold


class DivergentPairingError(ValueError):
    """The tree analysis proves the pairing integral diverges."""


@dataclass(frozen=True)
class Decomposition:
    """Explicit finite decomposition ``g = sum parts`` (checked pointwise on
    a dense sample at tolerance 1e-9)."""

    parts: tuple

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("decomposition needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))

    def validate_against(self, g: FunctionExpr, omega: MeasureSpace,
                         samples: int = 1001, tol: float = 1e-9) -> None:
        inset = omega.mass * 1e-7
        ts = np.linspace(omega.lower + inset, omega.upper - inset, samples)
        target = kernels.eval_program(compile_program(g, 0.0, 1.0), ts)
        total = np.zeros_like(ts)
        for part in self.parts:
            total += kernels.eval_program(compile_program(part, 0.0, 1.0), ts)
        scale = np.maximum(np.abs(target), 1.0)
        if float(np.max(np.abs(total - target) / scale)) > tol:
            raise ValueError("decomposition does not sum to the target function")


@dataclass(frozen=True)
class PairingReport:
    """One Hoelder-pairing check: the pairing integral against the certified
    product bound ``left * right / window_width``, margin normalized by
    ``max(1, bound)``."""

    integral: float
    left_norm: float
    right_bound: float
    window_width: float
    bound: float
    margin: float
    passed: bool


def small_norm_upper(g: FunctionExpr, G: GrandExponent, window,
                     omega: MeasureSpace, decomposition: Optional[Decomposition] = None,
                     *, rel_tol: float = DEFAULT_REL_TOL,
                     r_cap: float = 64.0) -> float:
    """Certified upper bound on the decomposition-infimum small norm over the
    window: sum of per-part conjugate inf-bounds for the given decomposition
    (default: the single-part decomposition {g})."""
    clipped = clip_window(omega, window)
    if clipped is None:
        return 0.0
    if decomposition is None:
        decomposition = Decomposition((g,))
    else:
        decomposition.validate_against(g, omega)
    total = 0.0
    for part in decomposition.parts:
        if not is_bounded_on(part, clipped[0], clipped[1]):
            raise UnboundedIntegrandError("unbounded part")
        total += eps_inf_conjugate(part, G, window, omega, rel_tol=rel_tol,
                                   r_cap=r_cap).value
    return total


def _curve_small_upper(xs: np.ndarray, values: np.ndarray, G: GrandExponent,
                       r_cap: float = 64.0) -> float:
    """Outer small-norm upper bound of a sampled nonnegative curve (the
    single-part decomposition of the curve itself): inf over eps of
    ``eps^(-theta/(q-eps)) * ||curve||_{(q-eps)'}`` with Simpson integrals
    and the sup surrogate above ``r_cap``."""
    sup_v = float(np.max(values))
    if sup_v == 0.0:
        return 0.0
    h = float(xs[1] - xs[0])
    w = simpson_weights(len(xs), h)
    measure = float(xs[-1] - xs[0])

    def psi_many(eps_arr: np.ndarray) -> np.ndarray:
        eps_arr = np.atleast_1d(eps_arr)
        q = G.p - eps_arr
        with np.errstate(divide="ignore", over="ignore"):
            rp = np.where(q > 1.0 + 1e-13, q / (q - 1.0), math.inf)
            out = np.empty(len(eps_arr))
            capped = rp > r_cap
            expo = np.where(np.isinf(rp[capped]), 0.0, 1.0 / rp[capped])
            out[capped] = sup_v * measure ** expo
            live = ~capped
            if np.any(live):
                ints = np.power(values[None, :], rp[live][:, None]) @ w
                out[live] = ints ** (1.0 / rp[live])
        return G.inv_prefactor(eps_arr) * out

    grid = eps_grid(G, 65)
    vals = psi_many(grid)
    best = float(np.min(vals))
    for i in local_maxima_indices(-vals)[:8]:
        a = grid[i - 1] if i > 0 else grid[i]
        b = grid[i + 1] if i < len(grid) - 1 else grid[i]
        if b > a:
            _, fv = golden_max(lambda e: -float(psi_many(np.asarray([e]))[0]),
                               float(a), float(b), 1e-8)
            best = min(best, -fv)
    return best


def dual_amalgam_upper(g: FunctionExpr, G1: GrandExponent, G2: GrandExponent,
                       Q: Window, omega: MeasureSpace, *,
                       M: int = 257, rel_tol: float = DEFAULT_REL_TOL,
                       r_cap: float = 64.0) -> float:
    """Upper bound on the conjugate-exponent amalgam norm of ``g``: sample
    the window-wise small-norm bound over the sweep grid, then apply the
    outer small-norm bound (conjugates from G2) to the sampled curve."""
    lo, hi = Q.sweep_domain(omega)
    xs = np.linspace(lo, hi, M)
    values = np.zeros(M)
    for i, x in enumerate(xs):
        win = Q.translate(float(x))
        clipped = clip_window(omega, win)
        if clipped is None:
            continue
        if not is_bounded_on(g, clipped[0], clipped[1]):
            raise UnboundedIntegrandError("unbounded integrand")
        values[i] = eps_inf_conjugate(g, G1, win, omega, rel_tol=rel_tol,
                                      r_cap=r_cap).value
    return _curve_small_upper(xs, values, G2, r_cap=r_cap)


def pairing_integral(f: FunctionExpr, g: FunctionExpr, omega: MeasureSpace,
                     *, rel_tol: float = 1e-10) -> float:
    """``integral over Omega of |f g|``; raises when the tree analysis proves
    divergence (singular exponents summing to -1 or below at an endpoint)."""
    product = Product((f, g))
    if divergence_threshold(product, omega.lower, omega.upper) <= 1.0:
        raise DivergentPairingError("divergent pairing")
    prep = get_prepared(product, (omega.lower, omega.upper), omega,
                        rel_tol=rel_tol, r_hi=1.0)
    return float(prep.integrals(np.asarray([1.0]))[0])


def holder_pairing(f: FunctionExpr, g: FunctionExpr, G1: GrandExponent,
                   G2: GrandExponent, Q: Window, omega: MeasureSpace, *,
                   tol: float = 1e-6, **kwargs) -> PairingReport:
    """Hoelder-type check: the pairing integral against
    ``amalgam(f) * dual_upper(g) / width(Q)``."""
    integral = pairing_integral(f, g, omega)
    left = amalgam_norm(f, G1, G2, Q, omega, **kwargs).value
    right = dual_amalgam_upper(g, G1, G2, Q, omega)
    bound = left * right / Q.width
    margin = (bound - integral) / max(1.0, bound)
    return PairingReport(integral=integral, left_norm=left, right_bound=right,
                         window_width=Q.width, bound=bound, margin=margin,
                         passed=bool(margin >= -tol))


def default_probes(G: GrandExponent, omega: MeasureSpace) -> list:
    """Pairing probes: flat, linear both ways, indicator halves, and a mild
    endpoint singularity."""
    mid = 0.5 * (omega.lower + omega.upper)
    return [
        Constant(1.0),
        Power(1.0, omega.lower, 1.0),
        Power(1.0, omega.upper, 1.0),
        Indicator(omega.lower, mid),
        Indicator(mid, omega.upper),
        Power(1.0, omega.lower, -1.0 / (2.0 * G.p)),
    ]


def associate_lower_bound(g: FunctionExpr, G1: GrandExponent, G2: GrandExponent,
                          Q: Window, omega: MeasureSpace,
                          probes: Optional[Sequence[FunctionExpr]] = None,
                          **kwargs) -> float:
    """Probe-based lower bound on the associate norm of ``g``: max over
    probes of ``integral |probe * g| / amalgam(probe)``.  Probes with zero or
    infinite amalgam norm, or divergent pairings, are skipped.  The matching
    upper bound is ``dual_amalgam_upper(g) / width(Q)`` (see the pairing
    normalization note in the module docstring)."""
    if probes is None:
        probes = default_probes(G1, omega)
    best = 0.0
    for probe in probes:
        left = amalgam_norm(probe, G1, G2, Q, omega, **kwargs).value
        if left == 0.0 or math.isinf(left):
            continue
        try:
            integral = pairing_integral(probe, g, omega)
        except DivergentPairingError:
            continue
        best = max(best, integral / left)
    return best
