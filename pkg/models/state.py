# models/state.py
"""State vectors are plain complex numpy arrays of length 2^N; these helpers build and check them."""
from __future__ import annotations

import numpy as np
import numpy.typing as npt

from models.pauli import DimensionMismatch, PauliError

StateVector = npt.NDArray[np.complex128]

NORM_TOL = 1e-12

_PRODUCT_LABELS: dict[str, tuple[complex, complex]] = {
    "0": (1.0, 0.0),
    "1": (0.0, 1.0),
    "+": (2**-0.5, 2**-0.5),
    "-": (2**-0.5, -(2**-0.5)),
}


def basis_state(n_sites: int, index: int = 0) -> StateVector:
    v = np.zeros(1 << n_sites, dtype=np.complex128)
    v[index] = 1.0
    return v


def all_up(n_sites: int) -> StateVector:
    return basis_state(n_sites, 0)


def product_state(labels: str) -> StateVector:
    """Product state from one label per site (site 0 first), labels in {0, 1, +, -}."""
    if not labels:
        raise PauliError("empty product-state label")
    v = np.ones(1, dtype=np.complex128)
    for ch in labels:
        if ch not in _PRODUCT_LABELS:
            raise PauliError(f"unknown product-state label {ch!r}")
        # site s is bit s: later sites are more significant
        v = np.kron(np.asarray(_PRODUCT_LABELS[ch], dtype=np.complex128), v)
    return v


def random_state(n_sites: int, rng: np.random.Generator) -> StateVector:
    dim = 1 << n_sites
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return normalize(v)


def normalize(v: np.ndarray) -> StateVector:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise PauliError("cannot normalize the zero vector")
    return (v / norm).astype(np.complex128, copy=False)


def n_sites_of(v: np.ndarray) -> int:
    dim = v.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise DimensionMismatch(f"length {dim} is not a power of two")
    return n


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def is_normalized(v: np.ndarray, tol: float = NORM_TOL) -> bool:
    return abs(float(np.linalg.norm(v)) - 1.0) <= tol
