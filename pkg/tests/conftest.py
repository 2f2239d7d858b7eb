import numpy as np
import pytest

from twocenter3d import _accel


@pytest.fixture(scope="session", autouse=True)
def _compile_kernels():
    _accel.warmup()


@pytest.fixture
def four_pairs():
    return np.array([[0.0, 0, 0], [2, 0, 0], [10, 0, 0], [12, 0, 0]])


@pytest.fixture
def tetra():
    # regular tetrahedron with edge 1
    return np.array([[1.0, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / np.sqrt(8)
