from __future__ import annotations

import logging

import numpy as np
import scipy.linalg

from models.pauli import OperatorSum
from services.engine.models import EngineError, NoConvergence, SolverStats

log = logging.getLogger("engine")

DEFAULT_TOL = 1e-9
MIN_TOL = 1e-12
KRYLOV_MAX_DIM = 40
BREAKDOWN = 1e-13
MAX_HALVINGS = 40


def _tridiagonal_exp_e1(alpha: list[float], beta: list[float], dt: float) -> np.ndarray:
    """exp(-i T dt) e_1 for the Lanczos tridiagonal T."""
    if len(alpha) == 1:
        return np.array([np.exp(-1j * alpha[0] * dt)])
    values, vectors = scipy.linalg.eigh_tridiagonal(np.asarray(alpha), np.asarray(beta))
    return vectors @ (np.exp(-1j * values * dt) * vectors[0, :])


def _lanczos_step(
    h: OperatorSum,
    v: np.ndarray,
    dt: float,
    budget: float,
    m_max: int,
    stats: SolverStats,
) -> tuple[np.ndarray, float]:
    """One exp(-i H dt) v; returns (result, a-posteriori error estimate)."""
    norm0 = float(np.linalg.norm(v))
    basis = np.zeros((v.shape[0], m_max), dtype=np.complex128)
    basis[:, 0] = v / norm0
    alpha: list[float] = []
    beta: list[float] = []
    error = np.inf
    coeffs = np.ones(1, dtype=np.complex128)

    for j in range(m_max):
        w = h.apply(basis[:, j])
        stats.matvecs += 1
        alpha.append(float(np.vdot(basis[:, j], w).real))
        # full reorthogonalization, twice
        for _ in range(2):
            w = w - basis[:, : j + 1] @ (basis[:, : j + 1].conj().T @ w)
        b = float(np.linalg.norm(w))
        coeffs = _tridiagonal_exp_e1(alpha, beta, dt)
        # Saad's estimate: the weight leaking into the next Krylov vector
        error = norm0 * b * abs(coeffs[-1])
        if b < BREAKDOWN or error <= budget:
            if b < BREAKDOWN:
                error = 0.0
            break
        if j + 1 < m_max:
            beta.append(b)
            basis[:, j + 1] = w / b

    m = len(alpha)
    return norm0 * (basis[:, :m] @ coeffs), error


def krylov_evolve(
    h: OperatorSum,
    v: np.ndarray,
    t: float,
    tol: float = DEFAULT_TOL,
    *,
    m_max: int = KRYLOV_MAX_DIM,
    stats: SolverStats | None = None,
) -> np.ndarray:
    """exp(-i H t) v with adaptive sub-stepping so the total error estimate stays under ``tol``."""
    if tol < MIN_TOL:
        raise EngineError(f"tol={tol} below the supported floor {MIN_TOL}")
    stats = stats if stats is not None else SolverStats()
    out = np.asarray(v, dtype=np.complex128)
    if t == 0 or not h.terms or not np.any(out):
        return out.copy()

    total = abs(t)
    direction = 1.0 if t > 0 else -1.0
    done = 0.0
    step = total
    halvings = 0
    while total - done > total * 1e-14:
        dt = min(step, total - done)
        budget = tol * dt / total
        result, error = _lanczos_step(h, out, direction * dt, budget, m_max, stats)
        if error > budget:
            halvings += 1
            stats.krylov_halvings += 1
            if halvings > MAX_HALVINGS:
                raise NoConvergence(halvings, error, "Krylov propagation")
            step = dt / 2
            log.debug("Krylov estimate %.2e > %.2e, halving step to %.3e", error, budget, step)
            continue
        out = result
        done += dt
        stats.krylov_substeps += 1

    norm_in = float(np.linalg.norm(v))
    norm_out = float(np.linalg.norm(out))
    drift = abs(norm_out - norm_in)
    stats.max_norm_drift = max(stats.max_norm_drift, drift)
    if drift > tol:
        log.warning("Norm drift %.2e after Krylov propagation over t=%.4g", drift, t)
    if norm_out:
        out = out * (norm_in / norm_out)
    return out
