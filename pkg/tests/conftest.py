import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from maskforge import zoo
from maskforge.masker import decompose_embeddings

settings.register_profile(
    "default", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def qotp2():
    return zoo.build_qotp(2)


@pytest.fixture(scope="session")
def odd3():
    return zoo.build_odd_d(3)


@pytest.fixture(scope="session")
def odd3_embeddings(odd3):
    return decompose_embeddings(odd3)


def random_hermitian(n, rng):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return x + x.conj().T


def random_density(n, rng, rank=None):
    rank = rank or n
    x = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real
