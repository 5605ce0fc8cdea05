"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import pytest

from selfsim.verify import CRITERIA, run_criterion

from .conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res = run_criterion(number)
    ACCEPTANCE_LINES.append(res.line())
    with capsys.disabled():
        print("\n" + res.line())
    failed = [c.line() for c in res.checks if not c.ok]
    assert res.ok, res.error or "\n".join(failed)
