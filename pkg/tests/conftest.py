import warnings

import pytest

from riskq import oracle
from riskq.model import ModelParams

ACCEPTANCE_LINES = []


@pytest.fixture
def desk():
    return ModelParams(B=3, p=0.75, C=0.1, R=1.0, L=2.0, gamma=1.0)


@pytest.fixture(scope="session")
def grid200():
    return oracle.random_model_grid(200, seed=0)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
