import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_psd(rng, n, rank=None):
    """Random PSD matrix with controllable rank."""
    rank = rank or n
    g = rng.normal(size=(n, rank))
    return g @ g.T


@pytest.fixture
def small_dataset():
    import fate

    return fate.generate_synthetic(
        fate.SyntheticSpec(n=160, d=5, rho=0.8, seed=11)
    )
