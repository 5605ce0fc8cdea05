import numpy as np
import pytest

from selfsim.exponents import eigen_profile
from selfsim.pde_verify import (
    RadialGrid,
    caloric_quadratic,
    calibration_error,
    evolve,
    evolve_profile,
    heat_quartic,
    lipschitz_demo,
    radial_laplacian,
    staged_center_trace,
)

ALPHA_MINUS_1 = 1.714266138962


def test_grid_snaps_radius():
    g = RadialGrid(0.1, 1.04, 1)
    assert g.R == pytest.approx(1.0)
    assert g.nodes[-1] == pytest.approx(g.R)
    assert g.max_dt() == pytest.approx(0.005)
    with pytest.raises(ValueError):
        RadialGrid(0.0, 1.0, 1)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_laplacian_exact_on_quadratics(N):
    g = RadialGrid(0.05, 1.0, N)
    r = g.nodes
    np.testing.assert_allclose(radial_laplacian(r**2, g), 2 * N, rtol=1e-10)


@pytest.mark.parametrize("N", [1, 3])
def test_quartic_laplacian(N):
    # Laplacian of r^4 is 4(N+2) r^2; the ghost stencil at r = 0 is off by O(h^2)
    g = RadialGrid(0.01, 1.0, N)
    r = g.nodes
    lap = radial_laplacian(r**4, g)
    np.testing.assert_allclose(lap[1:], 4 * (N + 2) * r[1:-1] ** 2, atol=5e-3)


def test_caloric_quadratic_is_exact():
    assert calibration_error(caloric_quadratic(2), 2, 1 / 20) < 1e-10


def test_quartic_second_order():
    e1 = calibration_error(heat_quartic(1), 1, 1 / 20)
    e2 = calibration_error(heat_quartic(1), 1, 1 / 40)
    assert 3.5 < e1 / e2 < 4.5


def test_cfl_above_one_rejected():
    g = RadialGrid(0.05, 1.0, 1)
    with pytest.raises(ValueError):
        evolve(np.ones(g.n + 1), g, -1.0, -0.5, lambda t: 1.0, cfl=3.0)


def test_eigen_profile_stays_self_similar():
    prof = eigen_profile(ALPHA_MINUS_1, "minus", 1, 1)
    tr = evolve_profile(prof, -0.5, 1 / 100)
    assert np.max(np.abs(tr.ratio(ALPHA_MINUS_1, -1.0) - 1)) < 1e-3
    assert np.all(tr.sign_changes == 1)


def test_lipschitz_slope_on_exact_power():
    # a trajectory with w0 = -(-t)^(a/2) gives the slope a/2 - 1 exactly
    taus = 2.0 ** -np.arange(1, 6)

    class Exact:
        def at(self, t):
            return -((-t) ** (ALPHA_MINUS_1 / 2))

    rep = lipschitz_demo(Exact(), ALPHA_MINUS_1, taus)
    assert rep.slope == pytest.approx(ALPHA_MINUS_1 / 2 - 1, rel=1e-12)
    assert not rep.bounded


def test_staged_trace_records_requested_times():
    prof = eigen_profile(ALPHA_MINUS_1, "minus", 1, 1)
    taus = [0.5, 0.25]
    tr = staged_center_trace(prof, taus, 1 / 50)
    for tau in taus:
        assert tr.at(-tau) == pytest.approx(-(tau ** (ALPHA_MINUS_1 / 2)), rel=2e-2)
