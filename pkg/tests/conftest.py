import numpy as np
import pytest

from gridprice import UserSet, build_ptdf, load_case
from gridprice.dcopf import DispatchModel

ACCEPTANCE_LINES = []


class Bundle:
    def __init__(self, name):
        self.case = load_case(f"cases/{name}.json")
        self.ptdf = build_ptdf(self.case)
        self.users = UserSet.from_case(self.case)
        self.model = DispatchModel(self.case, self.ptdf)


@pytest.fixture(scope="session")
def one_bus():
    return Bundle("one_bus")


@pytest.fixture(scope="session")
def two_bus():
    return Bundle("two_bus")


@pytest.fixture(scope="session")
def three_bus():
    return Bundle("three_bus")


@pytest.fixture(scope="session")
def ieee14():
    return Bundle("ieee14")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
