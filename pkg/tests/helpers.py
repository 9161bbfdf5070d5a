import os

import numpy as np
from scipy.stats import unitary_group

from tsvf.qcore import Bra, Ket, Operator

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def random_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.normal(size=dim) + 1j * rng.normal(size=dim)


def random_ket(rng: np.random.Generator, dim: int) -> Ket:
    return Ket(random_vector(rng, dim))


def random_bra(rng: np.random.Generator, dim: int) -> Bra:
    return Bra(random_vector(rng, dim))


def random_hermitian(rng: np.random.Generator, dim: int) -> Operator:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return Operator(0.5 * (m + m.conj().T))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def random_dichotomic(rng: np.random.Generator, dim: int, values=(-1.0, 1.0)) -> Operator:
    """Two distinct eigenvalues in a random eigenbasis, both with nonzero rank."""
    u = random_unitary(rng, dim)
    rank = int(rng.integers(1, dim))
    diag = np.array([values[1]] * rank + [values[0]] * (dim - rank))
    return Operator((u * diag) @ u.conj().T)
