import numpy as np
import pytest

from betaperturb.ensembles import RngStream


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def stream():
    return RngStream(11, 0)


def random_jacobi_arrays(rng, n):
    b = rng.normal(size=n)
    a = rng.uniform(0.3, 2.0, size=n - 1)
    return b, a
