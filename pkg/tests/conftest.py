import numpy as np
import pytest
from hypothesis import settings

from unravel._linalg import embed_operator
from unravel.circuits import haar_unitary

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
HAD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(rng, n):
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def full_gate(gate, site, n):
    return embed_operator(gate, (site, site + 1), n)


def random_unitary(rng, d):
    return haar_unitary(d, rng)
