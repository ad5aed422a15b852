import numpy as np
import pytest


def rand_spd(rng, n, floor=0.2):
    g = rng.standard_normal((n, n))
    return g @ g.T / n + floor * np.eye(n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
