import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selfsim.profile_ode import ProblemParams, Sign
from selfsim.shooting import (
    Side,
    ZeroAbsent,
    infinity_series,
    infinity_threshold,
    inverse_zero_map,
    shoot_infinity,
    shoot_origin,
    zero_map,
    zero_or_none,
)


def test_infinity_threshold():
    assert infinity_threshold(1) == pytest.approx(1.0)
    assert infinity_threshold(2) == pytest.approx(0.5)
    assert infinity_threshold(3) == pytest.approx(0.0)


def test_origin_shot_always_has_a_zero():
    for alpha in (0.2, 1.0, 4.0):
        assert shoot_origin(ProblemParams(1, alpha, Sign.PLUS)).zeros


def test_infinity_series_matches_integration():
    # the asymptotic start must agree with the integrated h at small t
    shot = shoot_infinity(ProblemParams(1, 2.5, Sign.PLUS), Sign.PLUS)
    h0, _ = infinity_series(2.5, 1, 1.0, 2e-3)
    assert np.ravel(shot.h(2e-3)[0])[0] == pytest.approx(float(h0), rel=1e-8)


def test_infinity_shot_agrees_with_origin_at_exponent():
    alpha = 2.397074586069
    origin = shoot_origin(ProblemParams(1, alpha, Sign.PLUS))
    inner = zero_map(alpha, Sign.MINUS, 1, Side.FROM_INFINITY, 1).value
    assert inner == pytest.approx(origin.zeros[0], abs=1e-8)


def test_zero_absent():
    with pytest.raises(ZeroAbsent):
        zero_map(0.3, Sign.PLUS, 5, Side.FROM_ORIGIN, 1)
    assert zero_or_none(0.3, Sign.PLUS, 5, Side.FROM_ORIGIN, 1) is None


@pytest.mark.parametrize("side", list(Side))
def test_inverse_round_trip(side):
    alpha = 3.0
    s = zero_map(alpha, Sign.MINUS, 1, side, 2).value
    assert inverse_zero_map(s, Sign.MINUS, 1, side, 2) == pytest.approx(alpha, abs=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.floats(1.1, 7.0), st.floats(0.05, 1.0), st.sampled_from(["plus", "minus"]))
def test_zero_maps_monotone(alpha, step, sign):
    a = zero_map(alpha, sign, 1, Side.FROM_ORIGIN, 1).value
    b = zero_map(alpha + step, sign, 1, Side.FROM_ORIGIN, 1).value
    assert b < a
    c = zero_map(alpha, sign, 1, Side.FROM_INFINITY, 1).value
    d = zero_map(alpha + step, sign, 1, Side.FROM_INFINITY, 1).value
    assert d > c


def test_fixed_branch_heat_zero_n1():
    prof = shoot_origin(ProblemParams(1, 4.0, Sign.PLUS), fixed_branch=True)
    assert prof.zeros[0] == pytest.approx(math.sqrt(6 - 2 * math.sqrt(6)), abs=1e-9)
    assert prof.zeros[1] == pytest.approx(math.sqrt(6 + 2 * math.sqrt(6)), abs=1e-9)
