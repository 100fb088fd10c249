import pytest

from ultrafraisse import PaddingSchedule, binary_tree, k4


@pytest.fixture
def tree_k4():
    return k4()


@pytest.fixture
def tree_b3():
    return binary_tree(3)


@pytest.fixture
def schedule():
    return PaddingSchedule()
