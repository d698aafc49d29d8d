"""Theorem-keyed verification harness.

Every desk-testable inequality handled by this library is registered here as
a claim with a stable id.  Claims run over a fixed 12-function corpus and
emit :class:`CheckReport` records (JSON array + CSV summary downstream).
Margins follow one convention: an inequality ``value <= bound`` reports
``margin = (bound - value) / max(1, |bound|)`` and passes at
``margin >= -tolerance`` (default 1e-6, sized for the composed quadrature
and sweep errors).

Known honest failure: the shrinking-window norm-tail check
``T10.acn.witness`` computes the tail values directly and they do *not* stay
above the documented threshold — the threshold descends from a closed form
whose window-size dependence drops out of the derivation, and the direct
evaluation keeps it.  The claim is reported as computed (fail), with a
fixed-window diagnostic series alongside showing the non-vanishing plateau
that the threshold was aiming at.  See README "Known findings".
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .amalgam import (
    Window,
    amalgam_norm,
    classical_amalgam_norm,
    classical_control_curve,
    control_curve,
    _theta0_outer,
)
from .expressions import (
    Constant,
    FunctionExpr,
    Indicator,
    MeasureSpace,
    Power,
    Product,
    Scale,
    Sum,
    TruncateAbove,
    compile_program,
    sup_abs,
    to_json_dict,
)
from . import kernels
from .grandnorm import (
    GrandExponent,
    NormOutcome,
    eps_grid,
    get_prepared,
    grand_norm,
)
from .optimize import geometric_grid
from .quadrature import clip_window
from .smalldual import (
    associate_lower_bound,
    default_probes,
    dual_amalgam_upper,
    holder_pairing,
    pairing_integral,
)

DEFAULT_TOLERANCE = 1e-6
TRUNCATION_LADDER = (1.0, 2.0, 4.0, 8.0, 16.0)
LADDER_CONV_TOL = 1e-4


# ---------------------------------------------------------------------------
# corpus

def default_corpus() -> Dict[str, FunctionExpr]:
    """The 12-function corpus: constants, linear ramps, indicators, the
    endpoint-singular family, a truncation and two sums.  Bounded members are
    kept below sup 1.2 so the density checks have headroom."""
    sing_half = Power(1.0, 0.0, -0.5)
    sing_third = Power(1.0, 0.0, -1.0 / 3.0)
    return {
        "zero": Constant(0.0),
        "one": Constant(1.0),
        "half": Constant(0.5),
        "ramp": Power(1.0, 0.0, 1.0),
        "coramp": Power(1.0, 1.0, 1.0),
        "ind_left": Indicator(0.0, 0.5),
        "ind_mid": Indicator(0.25, 0.75),
        "sing_half": sing_half,
        "sing_third": sing_third,
        "trunc_sing": TruncateAbove(1.2, sing_half),
        "sum_mild": Sum((Constant(0.5), Scale(0.5, Power(1.0, 0.0, 1.0)))),
        "sum_sing": Sum((Constant(0.25), Scale(0.25, sing_third))),
    }


BOUNDED_NAMES = ("one", "half", "ramp", "coramp", "ind_left", "ind_mid",
                 "trunc_sing", "sum_mild")
NONZERO_NAMES = ("one", "half", "ramp", "coramp", "ind_left", "ind_mid",
                 "sing_half", "sing_third", "trunc_sing", "sum_mild", "sum_sing")


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class CheckReport:
    claim_id: str
    verdict: str  # pass | fail | inconclusive
    margin: float
    inputs_digest: str
    quantities: dict
    notes: str = ""

    def to_json_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "verdict": self.verdict,
            "margin": self.margin,
            "inputs_digest": self.inputs_digest,
            "quantities": self.quantities,
            "notes": self.notes,
        }


def _digest(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _margin(value: float, bound: float) -> float:
    return (bound - value) / max(1.0, abs(bound))


@dataclass
class VerifyContext:
    """Shared configuration and memo for one verification run."""

    omega: MeasureSpace
    G1: GrandExponent
    G2: GrandExponent
    Q: Window
    corpus: Dict[str, FunctionExpr] = field(default_factory=default_corpus)
    tolerance: float = DEFAULT_TOLERANCE
    curve_points: int = 257
    _amalgam_memo: dict = field(default_factory=dict)
    _grand_memo: dict = field(default_factory=dict)

    def digest_base(self) -> dict:
        return {
            "omega": [self.omega.lower, self.omega.upper],
            "p": self.G1.p, "q": self.G2.p,
            "theta1": self.G1.theta, "theta2": self.G2.theta,
            "Q": [self.Q.start, self.Q.width],
            "corpus": sorted(self.corpus),
            "tolerance": self.tolerance,
            "curve_points": self.curve_points,
        }

    def amalgam(self, f: FunctionExpr, G1: Optional[GrandExponent] = None,
                G2: Optional[GrandExponent] = None,
                Q: Optional[Window] = None) -> NormOutcome:
        G1 = G1 or self.G1
        G2 = G2 or self.G2
        Q = Q or self.Q
        key = (f, G1, G2, Q)
        if key not in self._amalgam_memo:
            self._amalgam_memo[key] = amalgam_norm(f, G1, G2, Q, self.omega,
                                                   M=self.curve_points)
        return self._amalgam_memo[key]

    def grand(self, f: FunctionExpr, G: Optional[GrandExponent] = None) -> NormOutcome:
        G = G or self.G1
        key = (f, G)
        if key not in self._grand_memo:
            self._grand_memo[key] = grand_norm(
                f, G, (self.omega.lower, self.omega.upper), self.omega)
        return self._grand_memo[key]

    def sweep_measure(self) -> float:
        lo, hi = self.Q.sweep_domain(self.omega)
        return hi - lo

    def dual_upper(self, g: FunctionExpr, Q: Window) -> float:
        key = ("dual", g, Q)
        if key not in self._grand_memo:
            self._grand_memo[key] = dual_amalgam_upper(
                g, self.G1, self.G2, Q, self.omega, M=self.curve_points)
        return self._grand_memo[key]

    def probe_norms(self, Q: Window) -> list:
        key = ("probes", Q)
        if key not in self._grand_memo:
            probes = default_probes(self.G1, self.omega)
            self._grand_memo[key] = [
                (f, self.amalgam(f, Q=Q).value) for f in probes]
        return self._grand_memo[key]

    def solidity_unit_norm(self, G: GrandExponent, measure: float) -> float:
        """Grand norm of the constant 1 on a domain of the given measure
        (the solidity normalization constant)."""
        grid = eps_grid(G, 400)
        vals = G.prefactor(grid) * measure ** (1.0 / (G.p - grid))
        return float(np.max(vals))


# ---------------------------------------------------------------------------
# verification operations (spec-level API, also used by the CLI)

def vanishing_functional(f: FunctionExpr, G1: GrandExponent, G2: GrandExponent,
                         Q: Window, omega: MeasureSpace,
                         eps_list: Sequence[float], *,
                         M: int = 257) -> List[tuple]:
    """``V(eps) = eps^(theta/(p-eps)) * classical amalgam at the lowered
    exponents (p-eps, q-eps)`` for each grid point, descending in eps."""
    out = []
    for eps in sorted(eps_list, reverse=True):
        if not (0.0 < eps <= min(G1.p, G2.p) - 1.0):
            raise ValueError("eps grid must lie in (0, min(p,q)-1]")
        cl = classical_amalgam_norm(f, G1.p - eps, G2.p - eps, Q, omega, M=M)
        if math.isinf(cl.value):
            out.append((eps, math.inf))
        else:
            out.append((eps, float(eps ** (G1.theta / (G1.p - eps)) * cl.value)))
    return out


def acn_tail(f: FunctionExpr, G1: GrandExponent, G2: GrandExponent,
             omega: MeasureSpace, a_list: Sequence[float], *,
             M: int = 257) -> List[tuple]:
    """Norm tails ``T(a) = amalgam norm of f restricted to (lower, lower+a)``
    with the window Q = (lower, lower+a) shrinking alongside the set."""
    out = []
    for a in a_list:
        if not (0.0 < a < omega.mass):
            raise ValueError("a_list entries must lie inside the interval")
        lo = omega.lower
        g = Product((f, Indicator(lo, lo + a)))
        val = amalgam_norm(g, G1, G2, Window(lo, a), omega, M=M).value
        out.append((a, float(val)))
    return out


def acn_tail_fixed_window(f: FunctionExpr, G1: GrandExponent, G2: GrandExponent,
                          Q: Window, omega: MeasureSpace,
                          a_list: Sequence[float], *, M: int = 257) -> List[tuple]:
    """Diagnostic variant with the window held fixed (the absolutely
    continuous norm definition shrinks only the sets): exhibits the
    non-vanishing plateau for the singular witness."""
    out = []
    for a in a_list:
        lo = omega.lower
        g = Product((f, Indicator(lo, lo + a)))
        val = amalgam_norm(g, G1, G2, Q, omega, M=M).value
        out.append((a, float(val)))
    return out


def check_strictness(p: float, q: float, theta: float, omega: MeasureSpace,
                     Q: Window, *, tolerance: float = DEFAULT_TOLERANCE,
                     M: int = 257) -> CheckReport:
    """Strict-inclusion witness: the endpoint singularity ``t^(-1/p)`` has a
    finite weighted amalgam norm (bounded by ``(q-1)^theta * p^theta``) while
    its plain amalgam norm diverges."""
    if not (q <= p and theta >= 1.0):
        return CheckReport("P1.strict", "inconclusive", 0.0,
                           _digest({"p": p, "q": q, "theta": theta}),
                           {}, notes="hypotheses require q <= p and theta >= 1")
    f = Power(1.0, omega.lower, -1.0 / p)
    G1, G2 = GrandExponent(p, theta), GrandExponent(q, theta)
    grand_side = amalgam_norm(f, G1, G2, Q, omega, M=M)
    classical_side = classical_amalgam_norm(f, p, q, Q, omega, M=M)
    bound = (q - 1.0) ** theta * p ** theta
    finite_ok = math.isfinite(grand_side.value)
    margin = _margin(grand_side.value, bound) if finite_ok else -math.inf
    divergent_ok = math.isinf(classical_side.value)
    verdict = "pass" if (finite_ok and margin >= -tolerance and divergent_ok) else "fail"
    return CheckReport(
        "P1.strict", verdict, margin,
        _digest({"p": p, "q": q, "theta": theta, "Q": [Q.start, Q.width]}),
        {
            "grand_amalgam": grand_side.value,
            "bound": bound,
            "classical_amalgam": ("inf" if divergent_ok else classical_side.value),
        },
    )


# ---------------------------------------------------------------------------
# claim implementations

def _eval_points(f: FunctionExpr, omega: MeasureSpace, n: int) -> np.ndarray:
    inset = omega.mass * 1e-7
    ts = np.linspace(omega.lower + inset, omega.upper - inset, n)
    return kernels.eval_program(compile_program(f, 0.0, 1.0), ts)


def _claim_t3_p1(ctx: VerifyContext) -> CheckReport:
    worst = math.inf
    values = {}
    for name, f in sorted(ctx.corpus.items()):
        v = ctx.amalgam(f).value
        values[name] = v
        if math.isfinite(v):
            worst = min(worst, v)
    verdict = "pass" if worst >= 0.0 else "fail"
    return CheckReport("T3.P1", verdict, worst if math.isfinite(worst) else 0.0,
                       _digest({**ctx.digest_base(), "claim": "T3.P1"}),
                       {"norms": values}, notes="nonnegativity of the norm")


def _claim_t3_p2(ctx: VerifyContext) -> CheckReport:
    """Definiteness, contrapositive on a dense sample: a function that is
    nonzero somewhere on the sample must have positive norm; the zero
    function must have norm zero."""
    details = {}
    ok = True
    min_positive = math.inf
    for name, f in sorted(ctx.corpus.items()):
        sample_max = float(np.max(np.abs(_eval_points(f, ctx.omega, 10000))))
        norm = ctx.amalgam(f).value
        details[name] = {"sample_max": sample_max, "norm": norm}
        if sample_max > 0.0:
            ok = ok and norm > 0.0
            if math.isfinite(norm):
                min_positive = min(min_positive, norm)
        else:
            ok = ok and norm == 0.0
    return CheckReport("T3.P2", "pass" if ok else "fail",
                       min_positive if math.isfinite(min_positive) else 0.0,
                       _digest({**ctx.digest_base(), "claim": "T3.P2"}),
                       details, notes="definiteness via 1e4-point sample")


def _claim_t3_p3(ctx: VerifyContext) -> CheckReport:
    lam = 2.5
    margins = {}
    worst = math.inf
    for name in ("one", "ramp", "trunc_sing", "sum_sing", "sing_half"):
        f = ctx.corpus[name]
        base = ctx.amalgam(f).value
        scaled = ctx.amalgam(Scale(lam, f)).value
        if not (math.isfinite(base) and math.isfinite(scaled)):
            continue
        rel = abs(scaled - lam * base) / max(1.0, lam * base)
        margins[name] = rel
        worst = min(worst, 1e-8 - rel)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("T3.P3", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "T3.P3", "lam": lam}),
                       {"relative_errors": margins},
                       notes="homogeneity at lambda=2.5, tolerance 1e-8")


_TRIANGLE_PAIRS = (
    ("one", "ramp"), ("half", "ind_left"), ("ramp", "coramp"),
    ("sing_half", "one"), ("sum_sing", "trunc_sing"), ("ind_mid", "sum_mild"),
)


def _claim_t3_p4(ctx: VerifyContext) -> CheckReport:
    margins = {}
    worst = math.inf
    for na, nb in _TRIANGLE_PAIRS:
        fa, fb = ctx.corpus[na], ctx.corpus[nb]
        lhs = ctx.amalgam(Sum((fa, fb))).value
        rhs = ctx.amalgam(fa).value + ctx.amalgam(fb).value
        if not (math.isfinite(lhs) and math.isfinite(rhs)):
            continue
        m = _margin(lhs, rhs)
        margins[f"{na}+{nb}"] = m
        worst = min(worst, m)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("T3.P4", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "T3.P4"}),
                       {"margins": margins}, notes="triangle inequality")


_SOLID_PAIRS = (
    ("trunc_sing", "sing_half"), ("ind_mid", "one"), ("half", "one"),
    ("sum_mild", "one"), ("ind_left", "one"), ("ramp", "one"),
)


def _claim_t3_p5(ctx: VerifyContext) -> CheckReport:
    margins = {}
    worst = math.inf
    for small, big in _SOLID_PAIRS:
        lhs = ctx.amalgam(ctx.corpus[small]).value
        rhs = ctx.amalgam(ctx.corpus[big]).value
        if not math.isfinite(rhs):
            continue
        m = _margin(lhs, rhs)
        margins[f"{small}<= {big}"] = m
        worst = min(worst, m)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("T3.P5", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "T3.P5"}),
                       {"margins": margins},
                       notes="solidity on pointwise-dominated pairs")


def _claim_t3_p6(ctx: VerifyContext) -> CheckReport:
    """Monotone-limit ladder: truncations at levels 1..16 must increase to
    the full norm.  The 1e-4 convergence bar applies where the ladder
    actually reaches the function (sup <= top level); for the unbounded
    members the finite ladder is reported with its honest gap and checked
    for monotone approach only (their sup-exponent branches converge too
    slowly for any fixed level)."""
    details = {}
    min_step = math.inf
    conv_ok = True
    for name, f in sorted(ctx.corpus.items()):
        full = ctx.amalgam(f).value
        sup_f = sup_abs(f, ctx.omega.lower, ctx.omega.upper)
        # a truncation above the sup does not bite: the norm equals the full one
        ladder = [full if n >= sup_f else ctx.amalgam(TruncateAbove(n, f)).value
                  for n in TRUNCATION_LADDER]
        ladder.append(full)
        steps = [ladder[i + 1] - ladder[i] for i in range(len(ladder) - 1)]
        min_step = min(min_step, min(steps))
        exhausted = sup_abs(f, ctx.omega.lower, ctx.omega.upper) <= TRUNCATION_LADDER[-1]
        if math.isfinite(full) and full > 0.0:
            gap = (full - ladder[-2]) / full
        else:
            gap = 0.0
        if exhausted:
            conv_ok = conv_ok and gap <= LADDER_CONV_TOL
        details[name] = {"ladder": ladder[:-1], "full": full, "gap": gap,
                         "exhausted": exhausted}
    mono_ok = min_step >= -ctx.tolerance
    verdict = "pass" if (mono_ok and conv_ok) else "fail"
    return CheckReport("T3.P6", verdict, min_step,
                       _digest({**ctx.digest_base(), "claim": "T3.P6",
                                "ladder": TRUNCATION_LADDER}),
                       details,
                       notes="monotone truncation ladder; 1e-4 convergence "
                             "enforced for ladder-exhausted members")


def _claim_t3_p7(ctx: VerifyContext) -> CheckReport:
    """Indicator functions have finite norm, with the two-case constant
    (interval mass below/above 1)."""
    p, q, th = ctx.G1.p, ctx.G2.p, ctx.G1.theta
    cases = {
        "unit_mass": (MeasureSpace(0.0, 1.0), Indicator(0.0, 0.5)),
        "small_mass": (MeasureSpace(0.0, 0.5), Indicator(0.0, 0.25)),
        "large_mass": (MeasureSpace(0.0, 2.0), Indicator(0.0, 1.0)),
    }
    details = {}
    worst = math.inf
    for label, (om, chi) in sorted(cases.items()):
        Q = Window(om.lower, om.mass / 4.0)
        val = amalgam_norm(chi, ctx.G1, ctx.G2, Q, om, M=ctx.curve_points).value
        mu = om.mass
        bound = ((p - 1.0) ** th * (q - 1.0) ** th *
                 max(mu ** (1.0 / p + 1.0 / q), mu ** 2))
        m = _margin(val, bound)
        details[label] = {"norm": val, "bound": bound, "margin": m}
        worst = min(worst, m)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("T3.P7", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "T3.P7"}),
                       details, notes="indicator norms finite, two-case bound")


def _claim_t3_p8(ctx: VerifyContext) -> CheckReport:
    """Local embedding into L1: the integral over a set E is controlled by
    the amalgam norm, with the constant built from the conjugate-exponent
    amalgam norm of chi_E at one fixed eps."""
    p, q, th = ctx.G1.p, ctx.G2.p, ctx.G1.theta
    eps = 0.5 * (min(p, q) - 1.0)
    E = (ctx.omega.lower, 0.5 * (ctx.omega.lower + ctx.omega.upper))
    chi = Indicator(*E)
    pe, qe = p - eps, q - eps
    pc, qc = pe / (pe - 1.0), qe / (qe - 1.0)
    c_e = classical_amalgam_norm(chi, pc, qc, ctx.Q, ctx.omega,
                                 M=ctx.curve_points).value
    pref = eps ** (th / pe) * eps ** (th / qe)
    constant = c_e / (ctx.Q.width * pref)
    details = {"eps": eps, "constant": constant, "chi_norm_conj": c_e}
    worst = math.inf
    for name, f in sorted(ctx.corpus.items()):
        wnorm = ctx.amalgam(f).value
        if not math.isfinite(wnorm):
            continue
        prep = get_prepared(f, E, ctx.omega, r_hi=1.0)
        integral = float(prep.integrals(np.asarray([1.0]))[0])
        m = _margin(integral, constant * wnorm)
        details[name] = {"integral": integral, "rhs": constant * wnorm, "margin": m}
        worst = min(worst, m)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("T3.P8", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "T3.P8"}),
                       details, notes="local L1 embedding, fixed-eps constant")


def _claim_strict(ctx: VerifyContext) -> List[CheckReport]:
    reports = []
    for suffix, (p, q, th) in (("", (2.0, 2.0, 1.0)),
                               (".q15", (2.0, 1.5, 1.0)),
                               (".t2", (2.0, 2.0, 2.0))):
        rep = check_strictness(p, q, th, ctx.omega, ctx.Q,
                               tolerance=ctx.tolerance, M=ctx.curve_points)
        reports.append(CheckReport("P1.strict" + suffix, rep.verdict, rep.margin,
                                   rep.inputs_digest, rep.quantities, rep.notes))
    return reports


def _claim_chain(ctx: VerifyContext) -> CheckReport:
    """Scaled inclusion chain: every weighted classical amalgam at lowered
    exponents sits below the weighted amalgam norm."""
    p, q, th = ctx.G1.p, ctx.G2.p, ctx.G1.theta
    eps_g = geometric_grid(1e-3 * (p - 1.0), p - 1.0, 10)
    eta_g = geometric_grid(1e-3 * (q - 1.0), q - 1.0, 10)
    worst = math.inf
    details = {}
    for name, f in sorted(ctx.corpus.items()):
        wnorm = ctx.amalgam(f).value
        if not math.isfinite(wnorm):
            continue
        worst_f = math.inf
        for eps in eps_g:
            curve = classical_control_curve(f, p - eps, ctx.Q, ctx.omega,
                                            ctx.curve_points)
            if curve.has_infinite:
                worst_f = -math.inf
                break
            for eta in eta_g:
                outer = _theta0_outer(curve, q - eta)
                lhs = (eps ** (th / (p - eps)) * eta ** (th / (q - eta)) * outer)
                worst_f = min(worst_f, _margin(lhs, wnorm))
        details[name] = worst_f
        worst = min(worst, worst_f)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("P1.chain", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "P1.chain"}),
                       details, notes="10x10 lowered-exponent grid")


def _claim_embed(ctx: VerifyContext) -> CheckReport:
    """Embedding constant: weighted amalgam <= solidity constants times the
    plain amalgam (finite right sides only).  The outer constant uses the
    sweep-domain measure, which exceeds 1."""
    p, q, th = ctx.G1.p, ctx.G2.p, ctx.G1.theta
    mu_x = ctx.sweep_measure()
    grid = eps_grid(ctx.G2, 400)
    outer_const = float(np.max(
        ctx.G2.prefactor(grid) * mu_x ** (1.0 / (q - grid) - 1.0 / q)))
    inner_const = (p - 1.0) ** th
    details = {"inner_const": inner_const, "outer_const": outer_const}
    worst = math.inf
    for name in BOUNDED_NAMES:
        f = ctx.corpus[name]
        lhs = ctx.amalgam(f).value
        rhs = inner_const * outer_const * classical_amalgam_norm(
            f, p, q, ctx.Q, ctx.omega, M=ctx.curve_points).value
        if not math.isfinite(rhs):
            continue
        m = _margin(lhs, rhs)
        details[name] = m
        worst = min(worst, m)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("P1.embed", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "P1.embed"}),
                       details, notes="plain-amalgam embedding with solidity constants")


def _claim_inclusion(ctx: VerifyContext) -> CheckReport:
    """Lowering either exponent enlarges the space: finiteness propagates
    downward; the empirical norm ratios are reported."""
    G1_small = GrandExponent(1.0 + 0.8 * (ctx.G1.p - 1.0), ctx.G1.theta)
    G2_small = GrandExponent(1.0 + 0.8 * (ctx.G2.p - 1.0), ctx.G2.theta)
    ratios = {}
    ok = True
    for name, f in sorted(ctx.corpus.items()):
        big = ctx.amalgam(f).value
        if not math.isfinite(big):
            continue
        small = ctx.amalgam(f, G1=G1_small, G2=G2_small).value
        ok = ok and math.isfinite(small)
        if big > 0:
            ratios[name] = small / big
    const = max(ratios.values()) if ratios else 0.0
    return CheckReport("P2P3.inclusion", "pass" if ok else "fail", const,
                       _digest({**ctx.digest_base(), "claim": "P2P3.inclusion"}),
                       {"ratios": ratios, "empirical_constant": const},
                       notes="finiteness propagates to lowered exponents")


def _claim_product(ctx: VerifyContext) -> CheckReport:
    """Pointwise product bound at the classical split 1/p3 = 1/p1 + 1/p2."""
    p1 = 2.0 * ctx.G1.p
    q1 = 2.0 * ctx.G2.p
    pairs = (("one", "ramp"), ("ind_left", "sum_mild"), ("trunc_sing", "half"))
    worst = math.inf
    details = {}
    for na, nb in pairs:
        fa, fb = ctx.corpus[na], ctx.corpus[nb]
        lhs = classical_amalgam_norm(Product((fa, fb)), ctx.G1.p, ctx.G2.p,
                                     ctx.Q, ctx.omega, M=ctx.curve_points).value
        rhs = (classical_amalgam_norm(fa, p1, q1, ctx.Q, ctx.omega,
                                      M=ctx.curve_points).value *
               classical_amalgam_norm(fb, p1, q1, ctx.Q, ctx.omega,
                                      M=ctx.curve_points).value)
        m = _margin(lhs, rhs)
        details[f"{na}*{nb}"] = m
        worst = min(worst, m)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("P4.product", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "P4.product"}),
                       details, notes="product bound, classical exponent split")


def _claim_diag(ctx: VerifyContext, p: float) -> CheckReport:
    """Window-equals-interval identification: the ratio amalgam/grand stays
    inside a solidity-bounded bracket of bounded width."""
    G = GrandExponent(p, 1.0)
    Q = Window(ctx.omega.lower, ctx.omega.mass)
    ratios = {}
    for name, f in sorted(ctx.corpus.items()):
        denom = grand_norm(f, G, (ctx.omega.lower, ctx.omega.upper), ctx.omega)
        if denom.value == 0.0 or math.isinf(denom.value):
            continue
        numer = amalgam_norm(f, G, G, Q, ctx.omega, M=ctx.curve_points)
        if math.isinf(numer.value):
            continue
        ratios[name] = numer.value / denom.value
    r_lo, r_hi = min(ratios.values()), max(ratios.values())
    norm_const = ctx.solidity_unit_norm(G, ctx.omega.mass + Q.width)
    cap = (p - 1.0) ** G.theta * (1.0 + 1e-6) * norm_const
    width_ok = (r_hi / r_lo) < 10.0
    margin = _margin(r_hi, cap)
    verdict = "pass" if (width_ok and margin >= -ctx.tolerance) else "fail"
    return CheckReport(f"P5.diag.p{int(p)}", verdict, margin,
                       _digest({**ctx.digest_base(), "claim": "P5.diag", "p": p}),
                       {"ratios": ratios, "r_lo": r_lo, "r_hi": r_hi,
                        "cap": cap, "spread": r_hi / r_lo},
                       notes="ratio bracket, normalization = solidity constant")


def _claim_vanish(ctx: VerifyContext) -> CheckReport:
    """Density dichotomy: the lowered-exponent functional vanishes (1e-2 at
    eps = 1e-4) for bounded members and stays above 0.5 for the singular
    witness."""
    eps_list = [1.0, 0.5, 0.1, 1e-2, 1e-3, 1e-4]
    witness = Power(1.0, ctx.omega.lower, -1.0 / ctx.G1.p)
    details = {}
    worst = math.inf
    for name in BOUNDED_NAMES:
        series = vanishing_functional(ctx.corpus[name], ctx.G1, ctx.G2, ctx.Q,
                                      ctx.omega, [1e-4], M=ctx.curve_points)
        v = series[0][1]
        details[name] = v
        worst = min(worst, _margin(v, 1e-2))
    series_w = vanishing_functional(witness, ctx.G1, ctx.G2, ctx.Q, ctx.omega,
                                    eps_list, M=ctx.curve_points)
    v_w = dict(series_w)[1e-4]
    details["witness_series"] = series_w
    margin_w = _margin(0.5, v_w)
    worst = min(worst, margin_w)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("P6.vanish", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "P6.vanish"}),
                       details,
                       notes="bounded members vanish; singular witness floored at 0.5")


def _claim_windows(ctx: VerifyContext) -> CheckReport:
    """Window independence at outer weight zero: norms across window choices
    stay within bounded ratios (equivalence constants are not asserted)."""
    G2_flat = GrandExponent(ctx.G2.p, 0.0)
    widths = (0.25, 0.5, 1.0)
    details = {}
    ok = True
    for name in BOUNDED_NAMES:
        f = ctx.corpus[name]
        vals = []
        for w in widths:
            Q = Window(ctx.omega.lower, w * ctx.omega.mass)
            vals.append(amalgam_norm(f, ctx.G1, G2_flat, Q, ctx.omega,
                                     M=ctx.curve_points).value)
        if all(v > 0 and math.isfinite(v) for v in vals):
            spread = max(vals) / min(vals)
        else:
            spread = math.inf
            ok = ok and all(v == 0.0 for v in vals)
        details[name] = {"norms": vals, "spread": spread}
        ok = ok and (spread < 10.0 or all(v == 0.0 for v in vals))
    verdict = "pass" if ok else "fail"
    spread_max = max(d["spread"] for d in details.values() if math.isfinite(d["spread"]))
    return CheckReport("T2.windows", verdict, spread_max,
                       _digest({**ctx.digest_base(), "claim": "T2.windows"}),
                       details, notes="bounded norm ratios across windows {1/4,1/2,1}")


def _claim_holder(ctx: VerifyContext) -> CheckReport:
    """Pairing bound over bounded corpus x probe pairs (window = interval).

    Same content as :func:`grandamalgam.smalldual.holder_pairing`, with the
    probe amalgams and dual bounds computed once each."""
    Q = Window(ctx.omega.lower, ctx.omega.mass)
    lefts = ctx.probe_norms(Q)
    worst = math.inf
    details = {}
    for name in BOUNDED_NAMES:
        g = ctx.corpus[name]
        right = ctx.dual_upper(g, Q)
        for j, (f, left) in enumerate(lefts):
            integral = pairing_integral(f, g, ctx.omega)
            bound = left * right / Q.width
            m = _margin(integral, bound)
            details[f"{name}|probe{j}"] = m
            worst = min(worst, m)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("T7.holder", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "T7.holder"}),
                       {"margins": details},
                       notes="pairing integral vs certified product bound")


def _claim_acn(ctx: VerifyContext) -> List[CheckReport]:
    p, q, th = ctx.G1.p, ctx.G2.p, ctx.G1.theta
    a_list = [0.1, 0.01, 0.001]
    witness = Power(1.0, ctx.omega.lower, -1.0 / p)
    tails_w = acn_tail(witness, ctx.G1, ctx.G2, ctx.omega, a_list,
                       M=ctx.curve_points)
    tails_fixed = acn_tail_fixed_window(
        witness, ctx.G1, ctx.G2, Window(ctx.omega.lower, ctx.omega.mass),
        ctx.omega, a_list, M=ctx.curve_points)
    threshold = 0.25 * (p - 1.0) ** (th - 1.0) * p * (q - 1.0) ** th
    min_t = min(t for _, t in tails_w)
    margin_w = _margin(threshold, min_t)
    verdict_w = "pass" if margin_w >= -ctx.tolerance else "fail"
    rep_w = CheckReport(
        "T10.acn.witness", verdict_w, margin_w,
        _digest({**ctx.digest_base(), "claim": "T10.acn.witness", "a": a_list}),
        {"tails": tails_w, "threshold": threshold,
         "fixed_window_tails": tails_fixed},
        notes="shrinking-window tails vs threshold; fixed-window series shows "
              "the non-vanishing plateau (diagnostic)")

    tails_c = acn_tail(ctx.corpus["one"], ctx.G1, ctx.G2, ctx.omega, a_list,
                       M=ctx.curve_points)
    t_first, t_last = tails_c[0][1], tails_c[-1][1]
    margin_c = _margin(t_last, 1e-2 * t_first)
    verdict_c = "pass" if margin_c >= -ctx.tolerance else "fail"
    rep_c = CheckReport(
        "T10.acn.bounded", verdict_c, margin_c,
        _digest({**ctx.digest_base(), "claim": "T10.acn.bounded", "a": a_list}),
        {"tails": tails_c},
        notes="bounded-function tails decay below 1e-2 of the first tail")
    return [rep_w, rep_c]


def _claim_sandwich(ctx: VerifyContext) -> CheckReport:
    """Associate bracket: probe lower bound below the composite upper bound
    (width-normalized) for each bounded corpus member."""
    Q = Window(ctx.omega.lower, ctx.omega.mass)
    lefts = ctx.probe_norms(Q)
    worst = math.inf
    details = {}
    for name in BOUNDED_NAMES:
        g = ctx.corpus[name]
        ub = ctx.dual_upper(g, Q) / Q.width
        lb = 0.0
        for f, left in lefts:
            if left == 0.0 or math.isinf(left):
                continue
            lb = max(lb, pairing_integral(f, g, ctx.omega) / left)
        m = _margin(lb, ub)
        details[name] = {"lower": lb, "upper": ub, "bracket_width": ub - lb}
        worst = min(worst, m)
    verdict = "pass" if worst >= -ctx.tolerance else "fail"
    return CheckReport("T11.sandwich", verdict, worst,
                       _digest({**ctx.digest_base(), "claim": "T11.sandwich"}),
                       details, notes="probe lower bound vs composite upper bound")


def check_bf_properties(ctx: VerifyContext) -> List[CheckReport]:
    """Norm-axioms suite (properties 1-8)."""
    return [
        _claim_t3_p1(ctx), _claim_t3_p2(ctx), _claim_t3_p3(ctx),
        _claim_t3_p4(ctx), _claim_t3_p5(ctx), _claim_t3_p6(ctx),
        _claim_t3_p7(ctx), _claim_t3_p8(ctx),
    ]


# ---------------------------------------------------------------------------
# the registry and the runner

CLAIM_GROUPS: Dict[str, Callable] = {
    "T3.P1": _claim_t3_p1,
    "T3.P2": _claim_t3_p2,
    "T3.P3": _claim_t3_p3,
    "T3.P4": _claim_t3_p4,
    "T3.P5": _claim_t3_p5,
    "T3.P6": _claim_t3_p6,
    "T3.P7": _claim_t3_p7,
    "T3.P8": _claim_t3_p8,
    "P1.strict": _claim_strict,
    "P1.chain": _claim_chain,
    "P1.embed": _claim_embed,
    "P2P3.inclusion": _claim_inclusion,
    "P4.product": _claim_product,
    "P5.diag.p2": lambda ctx: _claim_diag(ctx, 2.0),
    "P5.diag.p3": lambda ctx: _claim_diag(ctx, 3.0),
    "P6.vanish": _claim_vanish,
    "T2.windows": _claim_windows,
    "T7.holder": _claim_holder,
    "T10.acn": _claim_acn,
    "T11.sandwich": _claim_sandwich,
}


def run_claims(ctx: VerifyContext, claims: Optional[Sequence[str]] = None,
               jobs: int = 1) -> List[CheckReport]:
    """Run the selected claim groups (all by default) and return reports
    sorted by claim id.  Claims are independent; ``jobs`` > 1 runs them in a
    thread pool with a deterministic merge."""
    selected = sorted(CLAIM_GROUPS) if claims is None else list(claims)
    unknown = [c for c in selected if c not in CLAIM_GROUPS]
    if unknown:
        raise KeyError(f"unknown claims: {unknown}")

    def run_one(cid: str) -> List[CheckReport]:
        out = CLAIM_GROUPS[cid](ctx)
        return out if isinstance(out, list) else [out]

    reports: List[CheckReport] = []
    if jobs > 1:
        # warm the shared memo in parallel so concurrent claims do not
        # duplicate the expensive corpus norms
        Q_full = Window(ctx.omega.lower, ctx.omega.mass)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda name: ctx.amalgam(ctx.corpus[name]),
                          sorted(ctx.corpus)))
            list(pool.map(lambda name: ctx.dual_upper(ctx.corpus[name], Q_full),
                          BOUNDED_NAMES))
            ctx.probe_norms(Q_full)
            for chunk in pool.map(run_one, selected):
                reports.extend(chunk)
    else:
        for cid in selected:
            reports.extend(run_one(cid))
    return sorted(reports, key=lambda r: r.claim_id)


def reports_to_json(reports: Sequence[CheckReport]) -> str:
    return json.dumps([r.to_json_dict() for r in reports], sort_keys=True,
                      indent=2) + "\n"


def reports_to_csv(reports: Sequence[CheckReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["claim_id", "verdict", "margin"])
    for r in reports:
        writer.writerow([r.claim_id, r.verdict, repr(r.margin)])
    return buf.getvalue()
