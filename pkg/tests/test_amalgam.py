import io
import math

import numpy as np
import pytest

from grandamalgam.amalgam import (
    ControlCurve,
    Window,
    amalgam_norm,
    classical_amalgam_norm,
    control_curve,
    curve_outer_norm,
    diagonal_ratio,
    simpson_weights,
)
from grandamalgam.expressions import (
    Constant,
    Indicator,
    MeasureSpace,
    Power,
    Product,
    Scale,
    Sum,
)
from grandamalgam.grandnorm import GrandExponent, grand_norm
from grandamalgam.optimize import geometric_grid

OM = MeasureSpace(0.0, 1.0)
G21 = GrandExponent(2.0, 1.0)
SING = Power(1.0, 0.0, -0.5)


def sup_over_eps(fn, lo=1e-7, hi=1.0, n=20000):
    xs = np.geomspace(lo, hi, n)
    return float(np.max(fn(xs)))


class TestWindow:
    def test_translate_and_sweep(self):
        Q = Window(0.0, 0.25)
        assert Q.translate(0.5) == (0.5, 0.75)
        lo, hi = Q.sweep_domain(OM)
        assert (lo, hi) == (-0.25, 1.0)

    def test_width_positive(self):
        with pytest.raises(ValueError):
            Window(0.0, 0.0)


class TestSimpson:
    def test_weights_integrate_cubics_exactly(self):
        n, h = 33, 1.0 / 32
        xs = np.linspace(0.0, 1.0, n)
        w = simpson_weights(n, h)
        assert w @ xs ** 3 == pytest.approx(0.25, rel=1e-14)

    def test_odd_required(self):
        with pytest.raises(ValueError):
            simpson_weights(32, 1.0)


class TestControlCurve:
    def test_constant_curve_matches_grid_oracle(self):
        # sample at x in (0,1): window (x,1), value sup_eps [eps(1-x)]^(1/(2-eps))
        curve = control_curve(Constant(1.0), G21, Window(0.0, 1.0), OM, M=65)
        for i in range(0, 65, 7):
            x = float(curve.xs[i])
            lo = max(0.0, x)
            hi = min(1.0, 1.0 + x)
            if hi <= lo:
                expected = 0.0
            else:
                ln = hi - lo
                expected = sup_over_eps(lambda e: (e * ln) ** (1.0 / (2.0 - e)))
            assert curve.values[i] == pytest.approx(expected, rel=1e-6, abs=1e-9)

    def test_zero_function(self):
        curve = control_curve(Constant(0.0), G21, Window(0.0, 0.25), OM, M=33)
        assert np.all(curve.values == 0.0)

    def test_singular_tail_matches_weighted_formula(self):
        # window (x, a) inside the singular support: the sampled value follows
        # sup_eps eps^((theta-1)/(p-eps)) p^(1/(p-eps)) (a^(eps/p)-x^(eps/p))^(1/(p-eps))
        a = 0.25
        f = Product((SING, Indicator(0.0, a)))
        curve = control_curve(f, G21, Window(0.0, a), OM, M=129)
        p = 2.0
        for i in range(0, 129, 11):
            x = float(curve.xs[i])
            if not 0.0 < x < a:
                continue

            def formula(eps):
                return (eps ** (0.0 / (p - eps)) * p ** (1.0 / (p - eps))
                        * (a ** (eps / p) - x ** (eps / p)) ** (1.0 / (p - eps)))

            expected = sup_over_eps(formula)
            assert curve.values[i] == pytest.approx(expected, rel=1e-5)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            control_curve(Constant(1.0), G21, Window(0.0, 0.25), OM, M=32)

    def test_csv_export(self):
        curve = control_curve(Constant(1.0), G21, Window(0.0, 0.5), OM, M=33)
        buf = io.StringIO()
        curve.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "x,value,argmax_eps"
        assert len(lines) == 34


class TestAmalgamNorm:
    def test_zero(self):
        out = amalgam_norm(Constant(0.0), G21, G21, Window(0.0, 0.25), OM)
        assert out.value == 0.0

    def test_singular_witness_finite_below_weighted_bound(self):
        out = amalgam_norm(SING, G21, G21, Window(0.0, 0.25), OM)
        assert math.isfinite(out.value)
        assert out.value <= (2.0 - 1.0) ** 1.0 * 2.0 ** 1.0 + 1e-6
        assert out.curve is not None

    def test_classical_of_singular_witness_divergent(self):
        out = classical_amalgam_norm(SING, 2.0, 2.0, Window(0.0, 0.25), OM)
        assert math.isinf(out.value)

    def test_unit_constant_solidity_bound(self):
        # pointwise the control samples sit below the grand norm of 1, so the
        # outer norm is bounded by the sweep-domain solidity constant
        Q = Window(0.0, 1.0)
        out = amalgam_norm(Constant(1.0), G21, G21, Q, OM)
        grand_one = grand_norm(Constant(1.0), G21, (0.0, 1.0), OM).value
        sweep_mass = 2.0
        solidity = sup_over_eps(lambda e: e ** (1.0 / (2.0 - e))
                                * sweep_mass ** (1.0 / (2.0 - e)))
        assert 0.0 < out.value <= grand_one * solidity + 1e-6

    def test_solidity_upper_bound_across_corpus(self):
        Q = Window(0.0, 0.25)
        sweep_mass = OM.mass + Q.width
        solidity = sup_over_eps(lambda e: e ** (1.0 / (2.0 - e))
                                * sweep_mass ** (1.0 / (2.0 - e)))
        for f in (Constant(1.0), SING, Indicator(0.25, 0.75),
                  Sum((Constant(0.25), Scale(0.25, Power(1.0, 0.0, -1.0 / 3.0))))):
            w = amalgam_norm(f, G21, G21, Q, OM).value
            g = grand_norm(f, G21, (0.0, 1.0), OM).value
            assert w <= g * solidity + 1e-6

    def test_homogeneity(self):
        Q = Window(0.0, 0.25)
        base = amalgam_norm(SING, G21, G21, Q, OM).value
        scaled = amalgam_norm(Scale(2.5, SING), G21, G21, Q, OM).value
        assert scaled == pytest.approx(2.5 * base, rel=1e-9)

    def test_infinite_sample_rule(self):
        # any infinite control sample forces an infinite amalgam norm
        out = classical_amalgam_norm(SING, 2.0, 2.0, Window(0.0, 0.5), OM)
        assert math.isinf(out.value)
        assert "infinite control samples" in out.note


class TestScaledInclusionChain:
    def test_chain_on_witness(self):
        # weighted lowered-exponent amalgams stay below the weighted norm
        p = q = 2.0
        wnorm = amalgam_norm(SING, G21, G21, Window(0.0, 0.25), OM).value
        for eps in geometric_grid(1e-3, 1.0, 6):
            for eta in geometric_grid(1e-3, 1.0, 6):
                cl = classical_amalgam_norm(SING, p - eps, q - eta,
                                            Window(0.0, 0.25), OM).value
                lhs = (eps ** (1.0 / (p - eps)) * eta ** (1.0 / (q - eta)) * cl)
                assert lhs <= wnorm + 1e-6


class TestDiagonalRatio:
    def test_undefined_for_zero(self):
        assert diagonal_ratio(Constant(0.0), G21, Window(0.0, 1.0), OM) is None

    def test_unit_constant_bounded_by_solidity(self):
        ratio = diagonal_ratio(Constant(1.0), G21, Window(0.0, 1.0), OM)
        solidity = sup_over_eps(lambda e: (2.0 * e) ** (1.0 / (2.0 - e)))
        assert ratio is not None
        assert 0.0 < ratio <= 1.0 * solidity + 1e-6

    def test_corpus_bracket_is_narrow(self):
        Q = Window(0.0, 1.0)
        ratios = []
        for f in (Constant(1.0), Constant(0.5), Power(1.0, 0.0, 1.0),
                  Indicator(0.0, 0.5), SING,
                  Sum((Constant(0.5), Scale(0.5, Power(1.0, 0.0, 1.0))))):
            r = diagonal_ratio(f, G21, Q, OM)
            if r is not None:
                ratios.append(r)
        assert len(ratios) >= 5
        assert max(ratios) / min(ratios) < 10.0


class TestOuterNorm:
    def test_theta0_outer_is_plain_norm(self):
        xs = np.linspace(0.0, 1.0, 65)
        curve = ControlCurve(xs=xs, values=np.full(65, 2.0),
                             argmax_eps=np.full(65, np.nan), err_rel=0.0)
        value, _ = curve_outer_norm(curve, GrandExponent(2.0, 0.0))
        assert value == pytest.approx(2.0, rel=1e-12)

    def test_infinite_curve(self):
        xs = np.linspace(0.0, 1.0, 65)
        vals = np.full(65, 1.0)
        vals[3] = math.inf
        curve = ControlCurve(xs=xs, values=vals,
                             argmax_eps=np.full(65, np.nan), err_rel=0.0)
        value, arg = curve_outer_norm(curve, G21)
        assert math.isinf(value) and arg is None
