import numpy as np
import pytest

from fedclus.datagen import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def blobs(n_per=200, sep=10.0, dim=2, seed=0):
    """Two isotropic unit-variance blobs ``sep`` apart along the first axis."""
    r = np.random.default_rng(seed)
    a = r.standard_normal((n_per, dim))
    b = r.standard_normal((n_per, dim))
    b[:, 0] += sep
    return np.vstack([a, b]), np.r_[np.zeros(n_per, int), np.ones(n_per, int)]


def toy_dataset(n=200, dim=3, seed=0):
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, dim))
    y = (X[:, 0] + 0.3 * r.standard_normal(n) > 0).astype(int)
    return Dataset(X, y)
