from __future__ import annotations

import logging

import numpy as np

from models.lattice import Lattice
from models.protocol import FloquetProtocol
from services.engine import FloquetPropagator, SolverStats, ground_state
from services.engine.krylov import DEFAULT_TOL
from services.hamiltonians import effective_generator
from services.observables.models import ObservableError, TimeSeries

log = logging.getLogger("observables")


def ground_energy(
    lattice: Lattice,
    protocol: FloquetProtocol,
    *,
    seed: int = 0,
    stats: SolverStats | None = None,
) -> float:
    values, _ = ground_state(effective_generator(lattice, protocol), 1, seed=seed, stats=stats)
    return float(values[0])


def _fraction(energy: float, e0: float) -> float:
    # infinite temperature sits at Tr(H_eff)/2^N = 0: no term of H_eff is the identity
    if e0 >= 0:
        raise ObservableError(f"ground energy {e0} is not below the infinite-temperature value 0")
    return (energy - e0) / (0.0 - e0)


def energy_density(
    lattice: Lattice,
    protocol: FloquetProtocol,
    state: np.ndarray,
    *,
    e0: float | None = None,
    seed: int = 0,
) -> float:
    """Heating fraction (<H_eff> - E0) / (0 - E0): 0 in the ground state, 1 at infinite temperature."""
    heff = effective_generator(lattice, protocol)
    if e0 is None:
        e0 = ground_energy(lattice, protocol, seed=seed)
    return _fraction(heff.expectation(state), e0)


def energy_series(
    lattice: Lattice,
    protocol: FloquetProtocol,
    initial: np.ndarray,
    n_max: int,
    *,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    stats: SolverStats | None = None,
) -> TimeSeries:
    heff = effective_generator(lattice, protocol)
    e0 = ground_energy(lattice, protocol, seed=seed, stats=stats)
    propagator = FloquetPropagator(lattice, protocol, tol=tol, stats=stats)
    values = [
        _fraction(heff.expectation(state), e0)
        for state in propagator.trajectory(np.asarray(initial, dtype=np.complex128), n_max)
    ]
    log.debug("Energy series: E0=%.6f, final heating fraction %.4f", e0, values[-1])
    return TimeSeries(
        label="energy", values=np.asarray(values), period=protocol.period, protocol=protocol.as_dict()
    )
