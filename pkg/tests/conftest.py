import numpy as np
import pytest

from models.lattice import Lattice, build_lattice
from models.protocol import FloquetProtocol


@pytest.fixture(scope="session")
def lattice12() -> Lattice:
    return build_lattice((2, 3), (2, 3))


@pytest.fixture(scope="session")
def lattice8() -> Lattice:
    return build_lattice((2, 2), (2, 2))


@pytest.fixture
def ideal() -> FloquetProtocol:
    return FloquetProtocol.ideal()


@pytest.fixture
def perturbed() -> FloquetProtocol:
    return FloquetProtocol.perturbed()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def dense_pauli(letters: dict[int, str], n_sites: int) -> np.ndarray:
    """Independent kron-built matrix; site s is bit s, so site 0 is the last factor."""
    single = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.diag([1.0, -1.0]),
    }
    out = np.eye(1)
    for site in reversed(range(n_sites)):
        out = np.kron(out, single[letters.get(site, "I")])
    return out
