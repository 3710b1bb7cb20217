"""Lowest eigenpairs of Pauli-sum Hamiltonians.

A block Krylov (Lanczos) iteration with full reorthogonalization and thick
restart. The block is wider than the number of wanted states, so exactly
degenerate manifolds come back as a full orthonormal basis.
"""
from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
import scipy.linalg

from models.pauli import OperatorSum, PauliString
from services.engine.models import EngineError, NoConvergence, SolverStats

log = logging.getLogger("engine")

RESIDUAL_TOL = 1e-9
MAX_WANTED = 8
DENSE_MAX_DIM = 1 << 10
BASIS_BLOCKS = 8
MAX_EXPANSIONS = 600

MatVec = Callable[[np.ndarray], np.ndarray]


def _orthonormalize(block: np.ndarray, basis: np.ndarray | None) -> np.ndarray:
    """Two passes of block Gram-Schmidt against ``basis``, then a rank-revealing QR."""
    for _ in range(2):
        if basis is not None and basis.shape[1]:
            block = block - basis @ (basis.conj().T @ block)
    if block.shape[1] == 0:
        return block
    q, r, _ = scipy.linalg.qr(block, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    keep = int(np.count_nonzero(diag > 1e-10 * max(1.0, diag[0] if diag.size else 1.0)))
    q = q[:, :keep]
    if basis is not None and basis.shape[1]:
        q = q - basis @ (basis.conj().T @ q)
        q, _ = np.linalg.qr(q)
    return q


def _lowest_iterative(
    matvec: MatVec,
    dim: int,
    k: int,
    dtype: type,
    *,
    tol: float,
    seed: int,
    stats: SolverStats,
) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    block = max(k + 2, 6)
    capacity = min(dim, BASIS_BLOCKS * block)
    start = rng.normal(size=(dim, block))
    if np.issubdtype(dtype, np.complexfloating):
        start = start + 1j * rng.normal(size=(dim, block))
    basis = _orthonormalize(start.astype(dtype), None)
    images = np.column_stack([matvec(basis[:, j]) for j in range(basis.shape[1])])
    stats.matvecs += basis.shape[1]

    residual = np.inf
    for expansion in range(1, MAX_EXPANSIONS + 1):
        projected = basis.conj().T @ images
        projected = (projected + projected.conj().T) / 2
        theta, coords = np.linalg.eigh(projected)
        wanted = min(block, coords.shape[1])
        ritz = basis @ coords[:, :wanted]
        ritz_images = images @ coords[:, :wanted]
        residuals = ritz_images - ritz * theta[:wanted]
        norms = np.linalg.norm(residuals[:, :k], axis=0)
        residual = float(norms.max())
        if residual <= tol:
            log.debug("Block Lanczos converged: %d expansions, basis %d", expansion, basis.shape[1])
            return theta[:k], ritz[:, :k]

        if basis.shape[1] + block > capacity:
            keep = min(basis.shape[1], max(2 * block, capacity // 2))
            basis = basis @ coords[:, :keep]
            images = images @ coords[:, :keep]
            stats.eigensolver_restarts += 1
            log.debug("Thick restart %d: kept %d Ritz vectors, residual %.3e",
                      stats.eigensolver_restarts, keep, residual)

        fresh = _orthonormalize(residuals, basis)
        if fresh.shape[1] == 0:
            # residuals already inside the basis: refill with random directions
            fresh = _orthonormalize(rng.normal(size=(dim, block)).astype(dtype), basis)
            if fresh.shape[1] == 0:
                break
        fresh_images = np.column_stack([matvec(fresh[:, j]) for j in range(fresh.shape[1])])
        stats.matvecs += fresh.shape[1]
        basis = np.hstack([basis, fresh])
        images = np.hstack([images, fresh_images])

    raise NoConvergence(MAX_EXPANSIONS, residual, "block Lanczos")


def _lowest_dense(matrix: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    values, vectors = scipy.linalg.eigh(matrix, subset_by_index=[0, k - 1])
    return values, vectors


def _check_wanted(k: int, dim: int) -> None:
    if not 1 <= k <= MAX_WANTED:
        raise EngineError(f"k={k} outside 1..{MAX_WANTED}")
    if k > dim:
        raise EngineError(f"k={k} exceeds Hilbert dimension {dim}")


def ground_state(
    h: OperatorSum,
    k: int = 1,
    *,
    tol: float = RESIDUAL_TOL,
    seed: int = 0,
    dense_max_dim: int = DENSE_MAX_DIM,
    stats: SolverStats | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """The ``k`` lowest eigenvalues (ascending) and eigenvectors (as columns) of ``h``."""
    stats = stats if stats is not None else SolverStats()
    dim = h.dim
    _check_wanted(k, dim)
    if dim <= dense_max_dim:
        return _lowest_dense(h.to_dense(), k)
    dtype = np.float64 if h.is_real else np.complex128
    return _lowest_iterative(h.apply, dim, k, dtype, tol=tol, seed=seed, stats=stats)


def finite_size_gap(h: OperatorSum, **kwargs: Any) -> float:
    """Spread of the four lowest levels, the splitting of the corner manifold."""
    values, _ = ground_state(h, 4, **kwargs)
    return float(values[-1] - values[0])


def _projector(strings: Sequence[PauliString]) -> MatVec:
    ops = [OperatorSum(s.n_sites, ((1.0, s),)) for s in strings]

    def project(v: np.ndarray) -> np.ndarray:
        for op in ops:
            v = 0.5 * (v + op.apply(v))
        return v

    return project


def sector_ground_state(
    h: OperatorSum,
    sector: Sequence[PauliString],
    k: int = 1,
    *,
    tol: float = RESIDUAL_TOL,
    seed: int = 0,
    dense_max_dim: int = DENSE_MAX_DIM,
    stats: SolverStats | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Lowest states of ``h`` inside the common +1 eigenspace of commuting ``sector`` strings.

    Solves ``H P + shift (1 - P)`` with ``shift`` above the spectrum, so states
    outside the sector sink to the top.
    """
    stats = stats if stats is not None else SolverStats()
    dim = h.dim
    _check_wanted(k, dim)
    for s in sector:
        if not h.commutes_with(s):
            raise EngineError(f"Hamiltonian does not conserve {s}")
    project = _projector(sector)
    shift = h.norm_bound() + 1.0

    if dim <= dense_max_dim:
        dense_h = h.to_dense()
        p = np.column_stack([project(col) for col in np.eye(dim, dtype=dense_h.dtype)])
        return _lowest_dense(dense_h @ p + shift * (np.eye(dim) - p), k)

    def matvec(v: np.ndarray) -> np.ndarray:
        pv = project(v)
        return h.apply(pv) + shift * (v - pv)

    dtype = np.float64 if h.is_real else np.complex128
    return _lowest_iterative(matvec, dim, k, dtype, tol=tol, seed=seed, stats=stats)
