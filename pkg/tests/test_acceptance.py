"""Acceptance battery at full sample counts; one PASS/FAIL line per criterion.

Each criterion is measured by :mod:`softedge.verify` (the same code behind
``softedge verify``), printed, and then asserted at its stated tolerance.
"""

import pytest

from softedge.verify import SUITES, run_suite

ORDER = sorted(SUITES, key=lambda name: SUITES[name][0])


@pytest.mark.slow
@pytest.mark.parametrize("suite", ORDER)
def test_criterion(suite, capsys):
    result = run_suite(suite, scale=1.0)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
