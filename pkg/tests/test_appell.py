import math

import numpy as np
import pytest

from selfsim.appell import (
    Psi,
    appell_transform,
    decay_check,
    dual_residual_max,
    inverse_appell,
    nonsign_check,
    round_trip_error,
    weighted_quotient,
)
from selfsim.exponents import eigen_profile
from selfsim.profile_ode import ProblemParams, Sign
from selfsim.shooting import shoot_origin

ALPHA_MINUS_1 = 1.714266138962


@pytest.fixture(scope="module")
def pair():
    return appell_transform(eigen_profile(ALPHA_MINUS_1, "minus", 1, 1))


def test_psi_continuous_with_derivative_jump():
    psi = Psi.from_zeros([1.0, 2.0], [1.0, 2.0, 1.0])
    for i, z in enumerate(psi.zeros):
        left, right = psi(z - 1e-12)[0], psi(z + 1e-12)[0]
        assert left == pytest.approx(right, rel=1e-10)
        jump = psi.derivative(z + 1e-12)[0] - psi.derivative(z - 1e-12)[0]
        assert jump == pytest.approx(psi.derivative_jump(i), rel=1e-8)


def test_psi_closed_form_first_piece():
    psi = Psi.from_zeros([1.5], [2.0, 1.0])
    r = np.array([0.3, 1.0])
    np.testing.assert_allclose(psi(r), np.exp(-r * r / 2), rtol=1e-14)
    # second piece: C exp(-r^2/4) with C fixed by continuity at 1.5
    c = math.exp(-1.5**2 / 2 + 1.5**2 / 4)
    assert psi(3.0)[0] == pytest.approx(c * math.exp(-9 / 4), rel=1e-14)


def test_dual_basics(pair):
    assert pair.beta == pytest.approx(-(1 + ALPHA_MINUS_1))
    g, gp = pair.dual(0.0)
    assert g[0] == pytest.approx(-1.0) and gp[0] == pytest.approx(0.0, abs=1e-12)
    assert dual_residual_max(pair) <= 1e-8


def test_round_trip(pair):
    back = inverse_appell(pair)
    assert back.zeros == pytest.approx(pair.source.zeros)
    assert round_trip_error(pair, np.linspace(0, 20, 401)) <= 1e-10


def test_decay_limit_converges(pair):
    res = decay_check(pair)
    assert res.converged
    assert np.isfinite(res.limit) and res.limit != 0
    assert res.ratio < 1


def test_decay_diverges_off_exponent():
    ctl = appell_transform(shoot_origin(ProblemParams(1, ALPHA_MINUS_1 + 0.1, Sign.MINUS)),
                           check=False)
    assert not decay_check(ctl).converged


@pytest.mark.parametrize("N", [1, 2, 3])
def test_nonsign_exact_gaussian(N):
    checks = nonsign_check(-float(N), N)
    assert all(c.ok for c in checks), [c.line() for c in checks]


@pytest.mark.parametrize("beta", [-0.9, -0.5, -0.1])
def test_nonsign_interior(beta):
    checks = nonsign_check(beta, 1)
    assert len(checks) == 2 and all(c.ok for c in checks)


def test_nonsign_rejects_positive_beta():
    with pytest.raises(ValueError):
        nonsign_check(0.5, 1)


def test_weighted_quotient_constant():
    assert weighted_quotient(lambda s: (np.ones_like(s), np.zeros_like(s)), 2.0, 1) == 0.0
