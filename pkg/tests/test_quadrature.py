import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from grandamalgam.expressions import (
    Constant,
    Indicator,
    MeasureSpace,
    Power,
    Product,
    Scale,
    Sum,
    TruncateAbove,
)
from grandamalgam.quadrature import (
    DivergentIntegralError,
    PreparedRnorm,
    QuadratureError,
    divergence_threshold,
    integrate_power_mean,
)

OM = MeasureSpace(0.0, 1.0)


def antiderivative_power(beta: float, a: float, b: float) -> float:
    """Oracle: integral of t^beta over (a, b) from the antiderivative."""
    if beta == -1.0:
        return math.log(b / a)
    return (b ** (beta + 1.0) - a ** (beta + 1.0)) / (beta + 1.0)


def test_singular_power_integral():
    # |t^(-1/2)|^1.5 = t^(-3/4), integral over (0,1) is 4 by the antiderivative
    res = integrate_power_mean(Power(1.0, 0.0, -0.5), 1.5, (0.0, 1.0), OM,
                               rel_tol=1e-9)
    assert res.value == pytest.approx(4.0, rel=1e-9)
    assert res.error >= 0.0


def test_constant_window():
    res = integrate_power_mean(Constant(1.0), 7.0, (0.25, 0.75), OM)
    assert res.value == pytest.approx(0.5, rel=1e-12)


def test_divergence_decided_from_tree():
    with pytest.raises(DivergentIntegralError):
        integrate_power_mean(Power(1.0, 0.0, -0.5), 2.0, (0.0, 1.0), OM)
    # away from the singular endpoint the same exponent integrates fine
    res = integrate_power_mean(Power(1.0, 0.0, -0.5), 2.0, (0.25, 1.0), OM)
    assert res.value == pytest.approx(math.log(4.0), rel=1e-9)


def test_divergence_threshold():
    assert divergence_threshold(Power(1.0, 0.0, -0.5), 0.0, 1.0) == 2.0
    assert divergence_threshold(Power(1.0, 0.0, -0.5), 0.5, 1.0) == math.inf
    s = Sum((Constant(1.0), Power(1.0, 0.0, -0.25)))
    assert divergence_threshold(s, 0.0, 1.0) == 4.0


@pytest.mark.parametrize("beta", [-0.5, -0.9, -0.99, -1.0 + 1e-3, -1.0 + 1e-6])
def test_near_divergent_powers(beta):
    # exact value 1/(1+beta); the relative floor grows like eps/(1+beta)
    res = integrate_power_mean(Power(1.0, 0.0, beta), 1.0, (0.0, 1.0), OM,
                               rel_tol=1e-9)
    exact = 1.0 / (1.0 + beta)
    tol = max(1e-9, 1e-13 / (1.0 + beta))
    assert res.value == pytest.approx(exact, rel=tol)
    assert res.error / exact <= 10 * tol


def test_sum_with_singular_part_vs_smooth_substitution_oracle():
    # (1 + t^(-1/2))^1.5 integrated via t = v^4: 4 v^3 (1 + 1/v^2)^1.5 is smooth
    f = Sum((Constant(1.0), Power(1.0, 0.0, -0.5)))
    res = integrate_power_mean(f, 1.5, (0.0, 1.0), OM, rel_tol=1e-10)
    mp.mp.dps = 25
    oracle = float(mp.quad(
        lambda v: 4 * v ** 3 * (1 + 1 / (v * v)) ** mp.mpf(1.5), [0, 1]))
    assert res.value == pytest.approx(oracle, rel=1e-9)


def test_right_endpoint_singularity():
    f = Power(2.0, 1.0, -0.25)
    res = integrate_power_mean(f, 2.0, (0.0, 1.0), OM, rel_tol=1e-10)
    # |2 (1-t)^(-1/4)|^2 = 4 (1-t)^(-1/2); integral = 8
    assert res.value == pytest.approx(8.0, rel=1e-9)


def test_truncation_kink_absorbed():
    f = TruncateAbove(1.2, Power(1.0, 0.0, -0.5))
    res = integrate_power_mean(f, 2.0, (0.0, 1.0), OM, rel_tol=1e-10)
    cross = (1.0 / 1.2) ** 2
    exact = 1.2 ** 2 * cross + math.log(1.0 / cross)
    assert res.value == pytest.approx(exact, rel=1e-9)


def test_indicator_jump():
    f = Product((Indicator(0.2, 0.7), Constant(2.0)))
    res = integrate_power_mean(f, 3.0, (0.0, 1.0), OM)
    assert res.value == pytest.approx(8.0 * 0.5, rel=1e-12)


@given(st.floats(0.05, 0.95))
def test_additivity_at_interior_split(m):
    f = Sum((Constant(0.5), Power(1.0, 0.0, -1.0 / 3.0)))
    whole = integrate_power_mean(f, 1.7, (0.0, 1.0), OM, rel_tol=1e-10)
    left = integrate_power_mean(f, 1.7, (0.0, m), OM, rel_tol=1e-10)
    right = integrate_power_mean(f, 1.7, (m, 1.0), OM, rel_tol=1e-10)
    combined_err = whole.error + left.error + right.error + 1e-12 * whole.value
    assert abs(whole.value - left.value - right.value) <= combined_err + 1e-10


@given(st.floats(1.0, 4.0))
def test_monotone_in_integrand(r):
    small = TruncateAbove(0.8, Power(1.0, 0.0, -0.5))
    big = TruncateAbove(1.6, Power(1.0, 0.0, -0.5))
    vs = integrate_power_mean(small, r, (0.0, 1.0), OM).value
    vb = integrate_power_mean(big, r, (0.0, 1.0), OM).value
    assert vs <= vb + 1e-9 * vb


def test_validation_errors():
    with pytest.raises(QuadratureError):
        integrate_power_mean(Constant(1.0), 0.5, (0.0, 1.0), OM)
    with pytest.raises(QuadratureError):
        integrate_power_mean(Constant(1.0), 2.0, (0.0, 1.0), OM, rel_tol=0.5)
    with pytest.raises(QuadratureError):
        integrate_power_mean(Constant(1.0), 2.0, (2.0, 3.0), OM)


def test_prepared_reuse_many_exponents():
    f = Power(1.0, 0.0, -0.5)
    prep = PreparedRnorm(f, 0.0, 1.0, rs_hint=(1.0, 1.9), force_quadrature=True)
    rs = np.linspace(1.0, 1.9, 20)
    got = prep.integrals(rs)
    exact = np.asarray([antiderivative_power(-0.5 * r, 0.0, 1.0) for r in rs])
    # oracle: integral of t^(-r/2) = 1/(1 - r/2)
    exact = 1.0 / (1.0 - rs / 2.0)
    np.testing.assert_allclose(got, exact, rtol=1e-8)
    assert np.isinf(prep.integrals(np.asarray([2.0]))[0])


def test_prepared_closed_form_matches_quadrature():
    cases = [
        (Power(1.0, 0.0, -0.5), (0.0, 1.0)),
        (Power(2.0, 1.0, 0.5), (0.0, 1.0)),
        (Product((Indicator(0.25, 0.75), Power(1.0, 0.0, 1.0))), (0.0, 1.0)),
        (Constant(0.7), (0.1, 0.9)),
        (Power(1.0, 0.0, -1.0 / 3.0), (0.2, 0.8)),
    ]
    rs = np.asarray([1.0, 1.3, 1.9])
    for f, win in cases:
        closed = PreparedRnorm(f, win[0], win[1])
        forced = PreparedRnorm(f, win[0], win[1], rs_hint=(1.0, 2.0),
                               force_quadrature=True)
        assert closed.kind in ("closed", "zero")
        np.testing.assert_allclose(closed.integrals(rs), forced.integrals(rs),
                                   rtol=1e-7)


def test_prepared_zero_function():
    prep = PreparedRnorm(Constant(0.0), 0.0, 1.0)
    assert prep.kind == "zero"
    assert prep.norms(np.asarray([1.5]))[0] == 0.0
