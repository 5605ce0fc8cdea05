import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selfsim.profile_ode import (
    Branch,
    ProblemParams,
    Sign,
    TailKind,
    branch_of,
    integrate_profile,
    sample_profile,
    series_coefficients,
)


def test_sign_parsing():
    assert Sign.parse("plus") is Sign.PLUS
    assert Sign.parse("-") is Sign.MINUS
    assert Sign.parse(-1) is Sign.MINUS
    assert Sign.PLUS.flip() is Sign.MINUS
    with pytest.raises(ValueError):
        Sign.parse("sideways")


def test_branch_constants():
    assert Branch.POSITIVE.lam == 1.0 and Branch.NEGATIVE.lam == 2.0
    assert branch_of(0.3) is Branch.POSITIVE
    assert branch_of(-0.3) is Branch.NEGATIVE


def test_params_validation():
    with pytest.raises(ValueError):
        ProblemParams(1, 0.0)
    with pytest.raises(ValueError):
        ProblemParams(0, 1.0)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("lam", [1.0, 2.0])
def test_series_coefficients_solve_the_equation(N, lam):
    # f = 1 + a s^2 + b s^4 must cancel the s^0 and s^2 terms of the residual
    alpha = 1.7
    a, b = series_coefficients(N, alpha, lam)
    c0 = 2 * a * N + lam * alpha / 2
    c2 = 12 * b + 4 * b * (N - 1) - lam * a + lam * alpha / 2 * a
    assert abs(c0) < 1e-14 and abs(c2) < 1e-14


@pytest.mark.parametrize("N", [1, 2, 3])
def test_quadratic_profiles_at_alpha_two(N):
    # at alpha = 2 the first piece is a quadratic on either branch
    plus = integrate_profile(ProblemParams(N, 2.0, Sign.PLUS), max_zeros=1)
    minus = integrate_profile(ProblemParams(N, 2.0, Sign.MINUS), max_zeros=1)
    assert plus.zeros[0] == pytest.approx(math.sqrt(2 * N), rel=1e-10)
    assert minus.zeros[0] == pytest.approx(math.sqrt(N), rel=1e-10)
    s = np.linspace(0.1, 0.9 * math.sqrt(N), 7)
    f, _ = minus(s)
    np.testing.assert_allclose(f, -1 + s**2 / N, atol=1e-10)


def test_profile_is_c1_across_zeros():
    prof = integrate_profile(ProblemParams(2, 3.1, Sign.PLUS), max_zeros=3)
    for i, z in enumerate(prof.zeros):
        left = prof.pieces[i].evaluate(z)
        right = prof.pieces[i + 1].evaluate(z)
        assert abs(left[0]) < 1e-10 and abs(right[0]) < 1e-10
        assert left[1] == pytest.approx(right[1], rel=1e-9)


def test_branches_alternate():
    prof = integrate_profile(ProblemParams(1, 5.0, Sign.MINUS), max_zeros=4)
    signs = [p.sign for p in prof.pieces]
    assert signs[0] is Sign.MINUS
    assert all(a is not b for a, b in zip(signs, signs[1:]))


def test_generic_alpha_grows():
    prof = integrate_profile(ProblemParams(1, 2.0, Sign.PLUS))
    assert prof.tail.kind is TailKind.EXPONENTIAL


def test_sample_profile_columns():
    prof = integrate_profile(ProblemParams(1, 3.0, Sign.PLUS), max_zeros=2)
    out = sample_profile(prof, np.linspace(0, 2, 11))
    assert {"s", "f", "fp"} <= set(out)
    assert out["f"][0] == pytest.approx(1.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 6.0), st.sampled_from([1, 2, 3]))
def test_fixed_branch_duality(alpha, N):
    # g(s) = -f(sqrt2 s) maps the positive fixed-branch solution onto the negative one
    plus = integrate_profile(ProblemParams(N, alpha, Sign.PLUS), max_zeros=2, fixed_branch=True)
    minus = integrate_profile(ProblemParams(N, alpha, Sign.MINUS), max_zeros=2,
                              fixed_branch=True)
    z_minus = [z for z in minus.zeros if z * math.sqrt(2) < plus.end]
    for zp, zm in zip(plus.zeros, z_minus):
        assert zm == pytest.approx(zp / math.sqrt(2), rel=1e-8)
