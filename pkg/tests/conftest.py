import numpy as np
import pytest

from rangetrack.config import paper_scenario


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def paper_cfg():
    return paper_scenario()


def random_rotations(rng, n):
    from rangetrack.so3 import random_rotation
    return [random_rotation(rng) for _ in range(n)]
