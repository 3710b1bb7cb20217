# utils/kernels.py
"""Low-level state-vector kernels shared by the operator algebra, the engine and the circuits.

Basis convention: amplitude index bit ``s`` is site ``s``; bit value 0 is spin up (Z = +1).
"""
from __future__ import annotations

import numpy as np
import numpy.typing as npt
from numba import njit, prange

Array = npt.NDArray[np.generic]


@njit(cache=True)
def _parity(x: int) -> int:
    p = 0
    while x:
        x &= x - 1
        p ^= 1
    return p


@njit(parallel=True, cache=True)
def _apply_terms(x_masks, z_masks, coeffs, vec, out):  # pragma: no cover - jitted
    n_terms = coeffs.shape[0]
    for a in prange(vec.shape[0]):
        ai = np.int64(a)
        acc = out[a]
        # fixed term order per amplitude: output bits do not depend on thread count
        for t in range(n_terms):
            amp = coeffs[t] * vec[ai ^ x_masks[t]]
            if _parity(z_masks[t] & ai):
                acc -= amp
            else:
                acc += amp
        out[a] = acc


def apply_pauli_terms(
    x_masks: npt.NDArray[np.int64],
    z_masks: npt.NDArray[np.int64],
    coeffs: npt.NDArray[np.floating] | npt.NDArray[np.complexfloating],
    vec: Array,
) -> Array:
    """out[a] = sum_t coeffs[t] * (-1)^popcount(z_t & a) * vec[a ^ x_t]."""
    dtype = np.result_type(coeffs.dtype, vec.dtype)
    out = np.zeros(vec.shape[0], dtype=dtype)
    if coeffs.shape[0] == 0:
        return out
    _apply_terms(
        x_masks,
        z_masks,
        np.ascontiguousarray(coeffs, dtype=dtype),
        np.ascontiguousarray(vec, dtype=dtype),
        out,
    )
    return out


def apply_single_qubit(vec: Array, site: int, matrix: Array) -> Array:
    dim = vec.shape[0]
    view = vec.reshape(dim >> (site + 1), 2, 1 << site)
    out = np.einsum("ab,ibj->iaj", matrix, view)
    return out.reshape(dim)


def flip_site(vec: Array, site: int) -> Array:
    """X on one site, as a view-free copy."""
    dim = vec.shape[0]
    view = vec.reshape(dim >> (site + 1), 2, 1 << site)
    return np.ascontiguousarray(view[:, ::-1, :]).reshape(dim)


def apply_x_rotation(vec: Array, site: int, half_angle: float) -> Array:
    """exp(-i * half_angle * X) on ``site``."""
    return np.cos(half_angle) * vec - 1j * np.sin(half_angle) * flip_site(vec, site)


def apply_cz(vec: Array, a: int, b: int) -> Array:
    idx = np.arange(vec.shape[0])
    both = ((idx >> a) & (idx >> b) & 1).astype(bool)
    out = vec.copy()
    out[both] *= -1
    return out


def apply_cx(vec: Array, control: int, target: int) -> Array:
    idx = np.arange(vec.shape[0])
    on = ((idx >> control) & 1).astype(bool)
    out = vec.copy()
    out[on] = vec[idx[on] ^ (1 << target)]
    return out
