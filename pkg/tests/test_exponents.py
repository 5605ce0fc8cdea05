import pytest

from selfsim.exponents import (
    eigen_profile,
    exponent_table,
    matching_residual,
    profile_for_alpha,
    solve_alpha,
    tail_sign,
)
from selfsim.profile_ode import Sign, TailKind

# regression values from an independent high-precision run of the solver
REFERENCE = {
    1: {"plus": (2.397074586069, 3.533945068106), "minus": (1.714266138962, 4.707541327019)},
    2: {"plus": (2.600087487038, 3.594500144679), "minus": (1.562237285241, 4.664712177414)},
    3: {"plus": (2.758061459118, 3.639327817570), "minus": (1.452568229916, 4.655362488170)},
}


def test_tail_sign_alternates():
    assert tail_sign("plus", 1) is Sign.MINUS
    assert tail_sign("plus", 2) is Sign.PLUS
    assert tail_sign("minus", 3) is Sign.PLUS


@pytest.mark.parametrize("N", [1, 2, 3])
def test_first_exponents(N):
    plus = solve_alpha(1, "plus", N)
    minus = solve_alpha(1, "minus", N)
    assert plus.alpha == pytest.approx(REFERENCE[N]["plus"][0], abs=1e-9)
    assert minus.alpha == pytest.approx(REFERENCE[N]["minus"][0], abs=1e-9)
    assert 0 < minus.alpha < 2 < plus.alpha
    assert plus.beta == pytest.approx(-(N + plus.alpha))
    assert plus.ident_check < 1e-6


def test_table_orders_and_interlaces():
    table = exponent_table(2, 1)
    assert table.alpha("plus", 2) == pytest.approx(REFERENCE[1]["plus"][1], abs=1e-9)
    assert table.alpha("minus", 2) == pytest.approx(REFERENCE[1]["minus"][1], abs=1e-9)
    assert all(ok for _, ok, _ in table.invariant_checks())
    rows = [r.as_row() for r in table.rows()]
    assert {r["sign"] for r in rows} == {"plus", "minus"}


def test_residual_changes_sign_across_exponent():
    a = REFERENCE[2]["minus"][0]
    assert matching_residual(a - 0.05, "minus", 1, 2) > 0 > matching_residual(a + 0.05, "minus", 1, 2)


def test_eigen_profile_tail_and_zero_count():
    prof = eigen_profile(REFERENCE[1]["plus"][1], "plus", 2, 1)
    assert prof.tail.kind is TailKind.ALGEBRAIC
    assert len(prof.zeros) == 2


def test_profile_for_alpha_detects_exponents():
    _, k = profile_for_alpha(REFERENCE[1]["minus"][0], "minus", 1)
    assert k == 1
    prof, k = profile_for_alpha(2.0, "plus", 1)
    assert k is None and prof.tail.kind is TailKind.EXPONENTIAL


def test_bad_index():
    with pytest.raises(ValueError):
        solve_alpha(0, "plus", 1)
