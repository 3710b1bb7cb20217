from __future__ import annotations

import logging
from collections.abc import Mapping

import numpy as np

from models.lattice import Lattice
from models.pauli import HERMITIAN_RESIDUAL, NonHermitianTerm, OperatorSum, PauliString
from models.protocol import FloquetProtocol
from models.state import is_normalized
from services.engine import FloquetPropagator, SolverStats
from services.engine.krylov import DEFAULT_TOL
from services.observables.models import ObservableError, ObservableLabel, TimeSeries

log = logging.getLogger("observables")


def _as_operator(string: PauliString) -> OperatorSum:
    if not string.is_hermitian:
        raise NonHermitianTerm(f"observable {string} is not Hermitian")
    return OperatorSum(string.n_sites, ((1.0, string),))


def _check_initial(initial: np.ndarray) -> np.ndarray:
    state = np.asarray(initial, dtype=np.complex128)
    if not is_normalized(state, 1e-9):
        raise ObservableError(f"initial state has norm {np.linalg.norm(state):.12f}")
    return state


def autocorrelations(
    lattice: Lattice,
    protocol: FloquetProtocol,
    initial: np.ndarray,
    observables: Mapping[str, PauliString],
    n_max: int,
    *,
    tol: float = DEFAULT_TOL,
    stats: SolverStats | None = None,
) -> dict[str, TimeSeries]:
    """Two-state autocorrelators Re<psi(nT)| O |phi_O(nT)> with phi_O(0) = O psi(0).

    ``psi`` is evolved once and shared by every observable.
    """
    if n_max < 0:
        raise ObservableError(f"n_max must be >= 0, got {n_max}")
    propagator = FloquetPropagator(lattice, protocol, tol=tol, stats=stats)
    psi = _check_initial(initial)
    ops = {label: _as_operator(s) for label, s in observables.items()}
    partners = {label: op.apply(psi) for label, op in ops.items()}
    real = {label: np.empty(n_max + 1) for label in ops}
    imag = {label: np.empty(n_max + 1) for label in ops}

    for n in range(n_max + 1):
        for label, op in ops.items():
            value = complex(np.vdot(psi, op.apply(partners[label])))
            real[label][n] = value.real
            imag[label][n] = value.imag
        if n == n_max:
            break
        psi = propagator.step(psi)
        partners = {label: propagator.step(phi) for label, phi in partners.items()}

    series: dict[str, TimeSeries] = {}
    for label in ops:
        worst = float(np.max(np.abs(imag[label])))
        if worst > HERMITIAN_RESIDUAL:
            log.warning("Autocorrelator %s: imaginary part up to %.2e", label, worst)
        series[label] = TimeSeries(
            label=label,
            values=real[label],
            period=protocol.period,
            protocol=protocol.as_dict(),
            imag_residual=imag[label],
        )
    return series


def autocorrelation(
    lattice: Lattice,
    protocol: FloquetProtocol,
    initial: np.ndarray,
    observable: PauliString,
    n_max: int,
    *,
    label: str | None = None,
    tol: float = DEFAULT_TOL,
    stats: SolverStats | None = None,
) -> TimeSeries:
    name = label or observable.label()
    return autocorrelations(
        lattice, protocol, initial, {name: observable}, n_max, tol=tol, stats=stats
    )[name]


def expectation_series(
    lattice: Lattice,
    protocol: FloquetProtocol,
    initial: np.ndarray,
    observable: PauliString,
    n_max: int,
    *,
    label: str | None = None,
    tol: float = DEFAULT_TOL,
    stats: SolverStats | None = None,
) -> TimeSeries:
    """<psi(nT)| O |psi(nT)>, the signal of a quench from a product state."""
    propagator = FloquetPropagator(lattice, protocol, tol=tol, stats=stats)
    op = _as_operator(observable)
    values = [op.expectation(state) for state in propagator.trajectory(_check_initial(initial), n_max)]
    return TimeSeries(
        label=label or f"<{observable.label()}>",
        values=np.asarray(values),
        period=protocol.period,
        protocol=protocol.as_dict(),
    )


def ideal_autocorrelation(label: ObservableLabel | str, n_max: int, j: float, period: float) -> np.ndarray:
    """Closed forms at zero perturbation and a perfect pulse, from the stabilizer ground state."""
    label = ObservableLabel.parse(label) if isinstance(label, str) else label
    n = np.arange(n_max + 1)
    stagger = np.where(n % 2 == 0, 1.0, -1.0)
    match label:
        case ObservableLabel.CORNER_Z | ObservableLabel.CORNER_X:
            return stagger
        case ObservableLabel.BULK_K | ObservableLabel.EDGE_K:
            return np.ones(n_max + 1)
        case ObservableLabel.BULK_Z | ObservableLabel.EDGE_Z:
            return stagger * np.cos(j * n * period)
    raise ObservableError(f"no closed form for {label.value}")
