import math

import numpy as np
import pytest

from grandamalgam.amalgam import Window, amalgam_norm
from grandamalgam.expressions import (
    Constant,
    Indicator,
    MeasureSpace,
    Power,
    Scale,
    Sum,
)
from grandamalgam.grandnorm import GrandExponent, UnboundedIntegrandError
from grandamalgam.smalldual import (
    Decomposition,
    DivergentPairingError,
    associate_lower_bound,
    default_probes,
    dual_amalgam_upper,
    holder_pairing,
    pairing_integral,
    small_norm_upper,
)

OM = MeasureSpace(0.0, 1.0)
G21 = GrandExponent(2.0, 1.0)
Q_FULL = Window(0.0, 1.0)
FULL = (0.0, 1.0)


class TestDecomposition:
    def test_valid_split(self):
        d = Decomposition((Constant(0.5), Constant(0.5)))
        d.validate_against(Constant(1.0), OM)

    def test_invalid_split_rejected(self):
        d = Decomposition((Constant(0.5), Constant(0.1)))
        with pytest.raises(ValueError):
            d.validate_against(Constant(1.0), OM)


class TestSmallNormUpper:
    def test_unit_constant(self):
        assert small_norm_upper(Constant(1.0), G21, FULL, OM) == pytest.approx(
            1.0, rel=1e-12)

    def test_zero(self):
        assert small_norm_upper(Constant(0.0), G21, FULL, OM) == 0.0

    def test_half_half_split_unchanged(self):
        d = Decomposition((Constant(0.5), Constant(0.5)))
        val = small_norm_upper(Constant(1.0), G21, FULL, OM, d)
        assert val == pytest.approx(1.0, rel=1e-12)

    def test_zero_part_never_changes_the_bound(self):
        base = small_norm_upper(Constant(1.0), G21, FULL, OM)
        padded = small_norm_upper(
            Constant(1.0), G21, FULL, OM,
            Decomposition((Constant(1.0), Constant(0.0))))
        assert padded == base

    def test_unbounded_part_rejected(self):
        with pytest.raises(UnboundedIntegrandError):
            small_norm_upper(Power(1.0, 0.0, -0.5), G21, FULL, OM)


class TestDualAmalgamUpper:
    def test_zero(self):
        assert dual_amalgam_upper(Constant(0.0), G21, G21, Q_FULL, OM) == 0.0

    def test_solidity(self):
        big = dual_amalgam_upper(Constant(1.0), G21, G21, Q_FULL, OM)
        small = dual_amalgam_upper(Indicator(0.0, 0.5), G21, G21, Q_FULL, OM)
        assert small <= big + 1e-9

    def test_dominates_pairing_probes(self):
        g = Constant(1.0)
        ub = dual_amalgam_upper(g, G21, G21, Q_FULL, OM) / Q_FULL.width
        for f in default_probes(G21, OM):
            left = amalgam_norm(f, G21, G21, Q_FULL, OM).value
            if left == 0.0 or math.isinf(left):
                continue
            assert pairing_integral(f, g, OM) / left <= ub + 1e-6


class TestPairing:
    def test_zero_left_factor(self):
        rep = holder_pairing(Constant(0.0), Constant(1.0), G21, G21, Q_FULL, OM)
        assert rep.integral == 0.0
        assert rep.passed

    def test_units(self):
        rep = holder_pairing(Constant(1.0), Constant(1.0), G21, G21, Q_FULL, OM)
        assert rep.integral == pytest.approx(1.0, rel=1e-10)
        assert rep.passed
        assert rep.margin >= 0.0

    def test_singular_probe(self):
        # integral of t^(-1/2) is exactly 2; the certified bound must cover it
        rep = holder_pairing(Power(1.0, 0.0, -0.5), Constant(1.0), G21, G21,
                             Q_FULL, OM)
        assert rep.integral == pytest.approx(2.0, rel=1e-10)
        assert rep.passed

    def test_divergent_pairing_detected(self):
        with pytest.raises(DivergentPairingError):
            pairing_integral(Power(1.0, 0.0, -0.5), Power(1.0, 0.0, -0.5), OM)


class TestAssociateBracket:
    def test_zero(self):
        assert associate_lower_bound(Constant(0.0), G21, G21, Q_FULL, OM) == 0.0

    def test_unit_constant_probe_arithmetic(self):
        lb = associate_lower_bound(Constant(1.0), G21, G21, Q_FULL, OM,
                                   probes=[Constant(1.0)])
        left = amalgam_norm(Constant(1.0), G21, G21, Q_FULL, OM).value
        assert lb == pytest.approx(1.0 / left, rel=1e-9)

    def test_sandwich(self):
        for g in (Constant(1.0), Indicator(0.0, 0.5),
                  Sum((Constant(0.5), Scale(0.5, Power(1.0, 0.0, 1.0))))):
            lb = associate_lower_bound(g, G21, G21, Q_FULL, OM)
            ub = dual_amalgam_upper(g, G21, G21, Q_FULL, OM) / Q_FULL.width
            assert lb <= ub + 1e-6
