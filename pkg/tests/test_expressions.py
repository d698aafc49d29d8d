import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grandamalgam.expressions import (
    Constant,
    ExpressionError,
    Indicator,
    MeasureSpace,
    Power,
    Product,
    Scale,
    SingularPointError,
    Sum,
    TruncateAbove,
    as_monomial,
    breakpoints,
    compile_program,
    dumps,
    evaluate,
    eval_program_values,
    from_json_dict,
    is_bounded_on,
    lead_exponent,
    loads,
    sup_abs,
    to_json_dict,
    validate_on,
)


def test_power_evaluation():
    f = Power(1.0, 0.0, -0.5)
    assert evaluate(f, 0.25) == pytest.approx(2.0, abs=0)


def test_zero_constant():
    assert evaluate(Constant(0.0), 0.7) == 0.0


def test_truncation_caps_value():
    f = TruncateAbove(3.0, Power(1.0, 0.0, -0.5))
    assert evaluate(f, 0.01) == 3.0
    assert evaluate(f, 0.25) == 2.0


def test_singular_point_raises():
    with pytest.raises(SingularPointError):
        evaluate(Power(1.0, 0.0, -0.5), 0.0)


def test_sum_product_scale_semantics():
    f = Sum((Constant(1.0), Scale(2.0, Power(1.0, 0.0, 1.0))))
    assert evaluate(f, 0.5) == pytest.approx(2.0)
    g = Product((Indicator(0.0, 0.5), Constant(3.0)))
    assert evaluate(g, 0.25) == 3.0
    assert evaluate(g, 0.75) == 0.0


def test_validate_rejects_interior_singularity():
    om = MeasureSpace(0.0, 1.0)
    with pytest.raises(ExpressionError):
        validate_on(Power(1.0, 0.5, -0.5), om)
    validate_on(Power(1.0, 0.0, -0.5), om)
    validate_on(Power(1.0, 0.5, 0.5), om)


def test_indicator_outside_interval_rejected():
    om = MeasureSpace(0.0, 1.0)
    with pytest.raises(ExpressionError):
        validate_on(Indicator(2.0, 3.0), om)


def test_json_round_trip_fixed():
    f = Sum((
        Constant(0.25),
        Scale(0.25, Power(1.0, 0.0, -1.0 / 3.0)),
        Product((Indicator(0.0, 0.5), TruncateAbove(2.0, Power(1.0, 1.0, -0.25)))),
    ))
    assert loads(dumps(f)) == f
    # the JSON tree is plain data with a kind tag
    tree = to_json_dict(f)
    assert tree["kind"] == "sum"
    assert json.loads(dumps(f)) == tree


_exprs = st.deferred(lambda: st.one_of(
    st.builds(Constant, st.floats(-3, 3, allow_nan=False)),
    st.builds(Power,
              st.floats(-2, 2, allow_nan=False),
              st.sampled_from([0.0, 1.0]),
              st.floats(-0.9, 2, allow_nan=False)),
    st.builds(Indicator, st.just(0.1), st.just(0.6)),
    st.builds(Scale, st.floats(-2, 2, allow_nan=False), _exprs),
    st.builds(TruncateAbove, st.floats(0, 4, allow_nan=False), _exprs),
    st.builds(lambda a, b: Sum((a, b)), _exprs, _exprs),
    st.builds(lambda a, b: Product((a, b)), _exprs, _exprs),
))


@given(_exprs)
def test_json_round_trip_property(expr):
    assert loads(dumps(expr)) == expr


@given(_exprs, st.floats(0.05, 0.95))
def test_program_matches_recursive_evaluation(expr, t):
    prog = compile_program(expr, base=0.0, direction=1.0)
    vec = float(eval_program_values(prog, np.asarray([t]))[0])
    assert vec == pytest.approx(evaluate(expr, t), rel=1e-12, abs=1e-12)


def test_rebased_program_is_exact_at_singular_center():
    f = Power(3.0, 1.0, -0.5)
    prog = compile_program(f, base=1.0, direction=-1.0)   # t = 1 - u
    u = np.asarray([1e-300, 1e-30, 0.5])
    vals = eval_program_values(prog, u)
    assert vals == pytest.approx([3.0 * 1e150, 3.0 * 1e15, 3.0 / math.sqrt(0.5)])


def test_lead_exponent_cases():
    f = Power(1.0, 0.0, -0.5)
    assert lead_exponent(f, 0.0, 1.0) == -0.5
    assert lead_exponent(f, 1.0, -1.0) == 0.0
    s = Sum((Constant(1.0), f))
    assert lead_exponent(s, 0.0, 1.0) == -0.5
    assert lead_exponent(TruncateAbove(2.0, f), 0.0, 1.0) == 0.0
    assert lead_exponent(Product((f, Power(1.0, 0.0, 1.0))), 0.0, 1.0) == 0.5
    assert lead_exponent(Indicator(0.5, 1.0), 0.0, 1.0) is None
    assert lead_exponent(Scale(0.0, f), 0.0, 1.0) is None


def test_boundedness():
    f = Power(1.0, 0.0, -0.5)
    assert not is_bounded_on(f, 0.0, 1.0)
    assert is_bounded_on(f, 0.25, 1.0)
    assert is_bounded_on(TruncateAbove(5.0, f), 0.0, 1.0)


def test_breakpoints_include_truncation_crossings():
    f = TruncateAbove(1.2, Power(1.0, 0.0, -0.5))
    pts = breakpoints(f, 0.0, 1.0)
    crossing = (1.0 / 1.2) ** 2
    assert any(abs(p - crossing) < 1e-12 for p in pts)
    g = Indicator(0.25, 0.75)
    assert breakpoints(g, 0.0, 1.0) == [0.25, 0.75]


def test_monomial_reduction():
    om_win = (0.0, 1.0)
    c, t0, a, w = as_monomial(Scale(2.0, Power(1.0, 0.0, -0.5)), om_win)
    assert (c, t0, a) == (2.0, 0.0, -0.5)
    c, t0, a, w = as_monomial(Product((Indicator(0.25, 0.5), Constant(3.0))), om_win)
    assert (c, a) == (3.0, 0.0)
    assert w == (0.25, 0.5)
    # powers sharing a center combine, different centers do not
    assert as_monomial(Product((Power(1.0, 0.0, -0.25), Power(2.0, 0.0, 1.0))),
                       om_win)[2] == pytest.approx(0.75)
    assert as_monomial(Product((Power(1.0, 0.0, -0.25), Power(1.0, 1.0, 1.0))),
                       om_win) is None
    assert as_monomial(Sum((Constant(1.0), Constant(2.0))), om_win) is None


def test_sup_abs_on_pieces():
    f = TruncateAbove(1.2, Power(1.0, 0.0, -0.5))
    assert sup_abs(f, 0.0, 1.0) == pytest.approx(1.2, rel=1e-6)
    assert sup_abs(Indicator(0.25, 0.75), 0.0, 1.0) == 1.0


def test_from_json_rejects_garbage():
    with pytest.raises(ExpressionError):
        from_json_dict({"value": 1.0})
    with pytest.raises(ExpressionError):
        from_json_dict({"kind": "wavelet"})
