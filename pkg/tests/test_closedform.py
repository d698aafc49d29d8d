import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grandamalgam.closedform import closed_form_rnorm
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
from grandamalgam.quadrature import integrate_power_mean

OM = MeasureSpace(0.0, 1.0)


def test_singular_power_at_lowered_exponent():
    # oracle: integral of t^(-(p-eps)/p) over (0,1) is p/eps (antiderivative
    # (p/eps) t^(eps/p)); here p=2, eps=0.5, then the 1/(p-eps) root
    out = closed_form_rnorm(Power(1.0, 0.0, -0.5), 1.5, OM, (0.0, 1.0))
    expected = (2.0 / 0.5) ** (1.0 / 1.5)
    assert expected == pytest.approx(2.5198420997897464, rel=1e-15)
    assert out.value == pytest.approx(expected, rel=1e-12)
    assert out.path == "closed-form"


def test_unit_constant():
    out = closed_form_rnorm(Constant(1.0), 3.0, OM, (0.0, 1.0))
    assert out.value == 1.0


def test_divergent_case_is_infinite():
    out = closed_form_rnorm(Power(1.0, 0.0, -0.5), 2.0, OM, (0.0, 1.0))
    assert math.isinf(out.value)


def test_general_sum_not_available():
    assert closed_form_rnorm(Sum((Constant(1.0), Power(1.0, 0.0, 1.0))),
                             2.0, OM, (0.0, 1.0)) is None
    assert closed_form_rnorm(TruncateAbove(1.0, Power(1.0, 0.0, -0.5)),
                             2.0, OM, (0.0, 1.0)) is None


def test_indicator_product_window_clipping():
    f = Product((Indicator(0.0, 0.5), Power(1.0, 0.0, -0.5)))
    out = closed_form_rnorm(f, 1.0, OM, (0.25, 1.0))
    # integral of t^(-1/2) over (0.25, 0.5) = 2(sqrt(.5) - .5)
    assert out.value == pytest.approx(2.0 * (math.sqrt(0.5) - 0.5), rel=1e-12)


def test_empty_window_gives_zero():
    f = Product((Indicator(0.0, 0.2), Constant(1.0)))
    out = closed_form_rnorm(f, 2.0, OM, (0.5, 1.0))
    assert out.value == 0.0


@given(st.one_of(st.just(0.0), st.floats(1e-6, 1e6, allow_subnormal=False)))
def test_homogeneity(lam):
    f = Power(1.0, 0.0, -0.5)
    base = closed_form_rnorm(f, 1.5, OM, (0.0, 1.0)).value
    scaled = closed_form_rnorm(Scale(lam, f), 1.5, OM, (0.0, 1.0)).value
    assert scaled == pytest.approx(lam * base, rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("f,win", [
    (Power(1.0, 0.0, -0.5), (0.0, 1.0)),
    (Power(1.5, 1.0, -0.25), (0.0, 1.0)),
    (Power(1.0, 0.0, 2.0), (0.1, 0.7)),
    (Product((Indicator(0.2, 0.9), Power(1.0, 0.0, -1.0 / 3.0))), (0.0, 1.0)),
    (Constant(0.3), (0.0, 0.5)),
])
@pytest.mark.parametrize("r", [1.0, 1.5, 2.5])
def test_agreement_with_quadrature_engine(f, win, r):
    closed = closed_form_rnorm(f, r, OM, win)
    assert closed is not None
    if math.isinf(closed.value):
        return
    quad = integrate_power_mean(f, r, win, OM, rel_tol=1e-10)
    assert closed.value == pytest.approx(quad.value ** (1.0 / r), rel=1e-7)


def test_truncation_norm_monotone_in_level_and_bounded_by_full():
    f = Power(1.0, 0.0, -0.5)
    r = 1.5
    full = closed_form_rnorm(f, r, OM, (0.0, 1.0)).value
    prev = 0.0
    for n in (1.0, 2.0, 4.0, 8.0):
        val = integrate_power_mean(TruncateAbove(n, f), r, (0.0, 1.0), OM).value ** (1 / r)
        assert val >= prev - 1e-12
        assert val <= full + 1e-12
        prev = val
