from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from models.lattice import Lattice
from models.pauli import OperatorSum
from models.protocol import FloquetProtocol
from models.state import n_sites_of
from services.engine.eigensolver import MAX_WANTED, ground_state
from services.engine.krylov import DEFAULT_TOL, KRYLOV_MAX_DIM, krylov_evolve
from services.engine.models import SolverStats
from services.hamiltonians import build_drive, corner_operators
from utils.kernels import apply_x_rotation

log = logging.getLogger("engine")


@dataclass(frozen=True, slots=True)
class PulseSchedule:
    """The first half period as a product of identical single-site X rotations.

    Each site gets exp(-i half_angle X), i.e. R_x(2 half_angle) with
    R_x(theta) = exp(-i theta X / 2).
    """

    half_angle: float

    @property
    def rotation_angle(self) -> float:
        return 2.0 * self.half_angle

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = np.asarray(v, dtype=np.complex128)
        for site in range(n_sites_of(out)):
            out = apply_x_rotation(out, site, self.half_angle)
        return out


def half_period_pulse(protocol: FloquetProtocol) -> PulseSchedule:
    return PulseSchedule(math.pi / 2 + protocol.epsilon * protocol.period / 2)


class FloquetPropagator:
    """One drive period U_F = exp(-i H2 T/2) exp(-i H1 T/2), with H2 built once."""

    def __init__(
        self,
        lattice: Lattice,
        protocol: FloquetProtocol,
        *,
        tol: float = DEFAULT_TOL,
        m_max: int = KRYLOV_MAX_DIM,
        stats: SolverStats | None = None,
    ) -> None:
        self.lattice = lattice
        self.protocol = protocol
        self.tol = tol
        self.m_max = m_max
        self.stats = stats if stats is not None else SolverStats()
        self.pulse = half_period_pulse(protocol)
        self.h2: OperatorSum = build_drive(lattice, protocol).h2

    def step(self, v: np.ndarray) -> np.ndarray:
        kicked = self.pulse.apply(v)
        return krylov_evolve(
            self.h2, kicked, self.protocol.period / 2, self.tol, m_max=self.m_max, stats=self.stats
        )

    def trajectory(self, v: np.ndarray, n_periods: int) -> Iterator[np.ndarray]:
        """Yield the state at n = 0, 1, ..., n_periods."""
        state = np.asarray(v, dtype=np.complex128)
        yield state
        for n in range(1, n_periods + 1):
            state = self.step(state)
            if n % 500 == 0:
                log.debug("Period %d/%d, max norm drift %.2e", n, n_periods, self.stats.max_norm_drift)
            yield state


def floquet_step(
    lattice: Lattice,
    protocol: FloquetProtocol,
    v: np.ndarray,
    *,
    tol: float = DEFAULT_TOL,
    stats: SolverStats | None = None,
) -> np.ndarray:
    return FloquetPropagator(lattice, protocol, tol=tol, stats=stats).step(v)


def _corner_manifold(
    lattice: Lattice,
    heff: OperatorSum,
    seed: int,
    stats: SolverStats | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(energies, eigenvectors, Z~ restricted to them) of the lowest min(2^corners, 8) states."""
    size = min(2 ** len(lattice.corners), MAX_WANTED, heff.dim)
    values, vectors = ground_state(heff, size, seed=seed, stats=stats)
    z_tilde, _ = corner_operators(lattice)
    z_op = OperatorSum(lattice.n_sites, ((1.0, z_tilde),))
    projected = vectors.conj().T @ z_op.apply(vectors)
    return values, vectors, (projected + projected.conj().T) / 2


def select_corner_polarized(
    lattice: Lattice,
    heff: OperatorSum,
    *,
    seed: int = 0,
    stats: SolverStats | None = None,
) -> np.ndarray:
    """The state of the low manifold with the largest corner polarization <Z~>.

    The manifold is the lowest min(2^corners, 8) eigenvectors; Z~ is
    diagonalized inside it. Without a blue corner this is just the lowest state.
    """
    if not lattice.blue_corners:
        _, vectors = ground_state(heff, 1, seed=seed, stats=stats)
        return vectors[:, 0].astype(np.complex128)

    values, vectors, z_block = _corner_manifold(lattice, heff, seed, stats)
    weights, coords = np.linalg.eigh(z_block)
    state = (vectors @ coords[:, -1]).astype(np.complex128)
    state /= np.linalg.norm(state)
    log.debug(
        "Corner-polarized state: <Z~>=%.6f within %d levels spanning %.3e",
        weights[-1], values.size, values[-1] - values[0],
    )
    return state


def corner_beat_gap(
    lattice: Lattice,
    heff: OperatorSum,
    *,
    seed: int = 0,
    stats: SolverStats | None = None,
) -> float:
    """Dominant angular frequency of <Z~(t) Z~> from the corner-polarized state under ``heff``.

    Inside the low manifold the signal is sum_ij c_i* Z_ij (Z c)_j exp(i (E_i - E_j) t);
    the returned value is |E_i - E_j| of the heaviest i != j term. It is at most
    the spread reported by ``finite_size_gap`` and smaller when the manifold
    splitting has parts that commute with Z~.
    """
    values, _, z_block = _corner_manifold(lattice, heff, seed, stats)
    _, coords = np.linalg.eigh(z_block)
    c = coords[:, -1]
    weights = np.abs(np.outer(c.conj(), z_block @ c) * z_block)
    np.fill_diagonal(weights, 0.0)
    if not weights.any():
        return 0.0
    i, j = np.unravel_index(int(np.argmax(weights)), weights.shape)
    return float(abs(values[i] - values[j]))
