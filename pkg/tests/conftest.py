import pytest

from ordsym.modsym import LevelParams, build_space


@pytest.fixture(scope="session")
def space11():
    return build_space(LevelParams(11, 3, 0))


@pytest.fixture(scope="session")
def space15():
    return build_space(LevelParams(5, 3, 1))


@pytest.fixture(scope="session")
def space33():
    return build_space(LevelParams(11, 3, 1))


@pytest.fixture(scope="session")
def space45():
    return build_space(LevelParams(5, 3, 2))


@pytest.fixture(scope="session")
def spaces(space11, space15, space33, space45):
    return {11: space11, 15: space15, 33: space33, 45: space45}
