import math

import numpy as np
import pytest

from selfsim.exponents import eigen_profile
from selfsim.spectral import Measure, discrete_min_eigenvalue, integrate, rayleigh, weight
from selfsim.spectral import verify_minimal_eigenvalue


def test_measure_conversions():
    assert Measure.for_sign("plus") is Measure.MU_PLUS
    assert Measure.MU_PLUS.to_alpha(1.5) == 3.0
    assert Measure.MU_MINUS.to_alpha(1.5) == 1.5


def test_quadrature_gaussian_moment():
    # int_0^inf exp(-s^2/4) ds = sqrt(pi)
    val = integrate(lambda s: weight(s, Measure.MU_PLUS, 1), 0.0, 40.0)
    assert val == pytest.approx(math.sqrt(math.pi), rel=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_rayleigh_of_quadratic(N):
    # f = 1 - s^2/(2N) solves the mu+ problem on (0, sqrt(2N)) with alpha = 2
    iv = (0.0, math.sqrt(2 * N))
    q = rayleigh(lambda s: (1 - s**2 / (2 * N), -s / N), iv, Measure.MU_PLUS, N)
    assert q == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("N", [1, 2])
def test_discrete_eigenvalue_quadratic(N):
    res = discrete_min_eigenvalue((0.0, math.sqrt(N)), Measure.MU_MINUS, N, 4000)
    assert res.recovered_alpha == pytest.approx(2.0, abs=1e-4)
    assert res.sign_changes() == 0


def test_discrete_eigenvalue_second_order():
    errs = [abs(discrete_min_eigenvalue((0.0, 2.0), Measure.MU_PLUS, 3, n).recovered_alpha
                - discrete_min_eigenvalue((0.0, 2.0), Measure.MU_PLUS, 3, 8000).recovered_alpha)
            for n in (200, 400)]
    assert math.log2(errs[0] / errs[1]) > 1.8


def test_small_grid_rejected():
    with pytest.raises(ValueError):
        discrete_min_eigenvalue((0.0, 1.0), Measure.MU_PLUS, 1, 10)


def test_eigen_profile_identities():
    prof = eigen_profile(1.714266138962, "minus", 1, 1)
    checks = verify_minimal_eigenvalue(prof, grid_points=4000)
    assert all(c.ok for c in checks), [c.line() for c in checks if not c.ok]


def test_wrong_alpha_is_detected():
    prof = eigen_profile(1.714266138962, "minus", 1, 1)
    checks = verify_minimal_eigenvalue(prof, alpha=1.75, grid_points=2000)
    assert not all(c.ok for c in checks)
    assert np.isfinite([c.value for c in checks]).any()
