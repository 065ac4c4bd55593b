import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_ket(n, rng):
    z = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return z / np.linalg.norm(z)


def random_dm(n, rng, rank=None):
    d = 2**n
    k = d if rank is None else rank
    a = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = a @ a.conj().T
    return rho / np.trace(rho)
