import warnings

import numpy as np
import pytest

from msts.model import LowQualityFactorWarning

ACCEPTANCE_LINES = []


def record(item, passed, detail):
    line = f"ACCEPTANCE {item} {'PASS' if passed else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


def random_symmetric(rng, M, scale=1.0):
    X = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    return scale * (X + X.T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(autouse=True)
def _quiet_low_q():
    # toy models in the tests have Q ~ 10, far below the weak-loss regime
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowQualityFactorWarning)
        yield
