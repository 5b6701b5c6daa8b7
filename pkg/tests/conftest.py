import numpy as np
import pytest

from cavity_billiard import BilliardMap, make_law_wu, make_sinusoidal, make_static


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def static_map():
    return BilliardMap(make_static(1.0))


@pytest.fixture(scope="session")
def sin1_map():
    return BilliardMap(make_sinusoidal(1.0, 0.01, np.pi))


@pytest.fixture(scope="session")
def sin2_map():
    return BilliardMap(make_sinusoidal(1.0, 0.01, 2 * np.pi))


@pytest.fixture(scope="session")
def lawwu_map():
    return BilliardMap(make_law_wu(1.0, 0.1, 2))


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
