from __future__ import annotations

import pytest

from stochparity import fixtures as fx
from stochparity import solve_game


@pytest.fixture(scope="session")
def g1():
    return fx.g1()


@pytest.fixture(scope="session")
def g2():
    return fx.g2()


@pytest.fixture(scope="session")
def g3():
    return fx.g3()


@pytest.fixture(scope="session")
def sol1(g1):
    return solve_game(g1)


@pytest.fixture(scope="session")
def sol2(g2):
    return solve_game(g2)


@pytest.fixture(scope="session")
def sol3(g3):
    return solve_game(g3)


@pytest.fixture(scope="session")
def sigma3():
    return fx.sigma3()
