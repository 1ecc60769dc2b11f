import numpy as np
import pytest

from drqr.core import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_instance(rng, n=None, d=None, scale=2.0):
    n = int(rng.integers(3, 9)) if n is None else n
    d = int(rng.integers(0, 3)) if d is None else d
    X = rng.normal(size=(n, d))
    y = scale * rng.normal(size=n)
    return Dataset(X, y)


@pytest.fixture
def make_instance(rng):
    def _make(n=None, d=None, scale=2.0):
        return random_instance(rng, n, d, scale)
    return _make
