import math

import numpy as np
import pytest

from entropy_lab import property_suite


@pytest.fixture(scope="session")
def n128():
    """The converged odd_fplus N=128 minimizer, shared with the property suite's cache."""
    return property_suite._n128()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def gaussian_entropy_oracle() -> float:
    """-int rho log rho for rho = sqrt(2) exp(-2 pi x^2), in closed form."""
    return 0.5 * (1.0 - math.log(2.0))


# one verdict line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
