import numpy as np
import pytest

from gamlss_boost.simulation import sample_negbin, sample_weibull


def random_state(family, n, rng):
    """Random linear predictors (2, n) and a response drawn from them."""
    if family == "gaussian":
        etas = np.vstack([rng.normal(0, 2, n), rng.normal(0, 0.7, n)])
        y = rng.normal(etas[0], np.exp(etas[1]))
    elif family == "negbin":
        etas = np.vstack([rng.normal(0.5, 1.0, n), rng.normal(-0.5, 1.0, n)])
        y = sample_negbin(np.exp(etas[0]), np.exp(etas[1]), rng)
    else:
        etas = np.vstack([rng.normal(0.3, 0.5, n), rng.normal(0.2, 0.4, n)])
        y = sample_weibull(np.exp(etas[0]), np.exp(etas[1]), rng)
    # evaluate away from the generating values
    etas = etas + rng.normal(0, 0.3, etas.shape)
    return etas, y


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record and print one PASS/FAIL line, then assert it."""

    def check(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
