"""Statevector simulation of compiled circuits, ideal or with sampled Pauli errors."""
from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from models.pauli import OperatorSum, PauliString
from models.state import StateVector, n_sites_of
from services.circuits.compiler import echo_circuit
from services.circuits.models import Circuit, CircuitError, Gate, GateName, NoiseModel, SeedRequired
from utils.kernels import apply_cx, apply_cz, apply_single_qubit, flip_site

log = logging.getLogger("circuits")

_SQRT_HALF = 2**-0.5
_HADAMARD = np.array([[_SQRT_HALF, _SQRT_HALF], [_SQRT_HALF, -_SQRT_HALF]], dtype=np.complex128)
# error Paulis by index 1..3 = X, Y, Z
_PAULIS = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


@dataclass(frozen=True, slots=True)
class Estimate:
    mean: float
    stderr: float
    trajectories: int


def _rotation(name: GateName, angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if name is GateName.RX:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if name is GateName.RY:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=np.complex128)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    match gate.name:
        case GateName.CZ:
            return apply_cz(state, *gate.qubits)
        case GateName.CX:
            return apply_cx(state, *gate.qubits)
        case GateName.X:
            return flip_site(state, gate.qubits[0])
        case GateName.H:
            return apply_single_qubit(state, gate.qubits[0], _HADAMARD)
        case _:
            assert gate.angle is not None
            return apply_single_qubit(state, gate.qubits[0], _rotation(gate.name, gate.angle))


def _check_width(circuit: Circuit, initial: np.ndarray) -> StateVector:
    state = np.asarray(initial, dtype=np.complex128)
    if n_sites_of(state) != circuit.n_qubits:
        raise CircuitError(f"{circuit.n_qubits}-qubit circuit on a {n_sites_of(state)}-site state")
    return state


def simulate_ideal(circuit: Circuit, initial: np.ndarray) -> StateVector:
    state = _check_width(circuit, initial)
    for gate in circuit.gates:
        state = apply_gate(state, gate)
    return state


def _pauli_error(state: StateVector, gate: Gate, rng: np.random.Generator) -> StateVector:
    """A uniformly random non-identity Pauli on the gate's support."""
    width = len(gate.qubits)
    code = int(rng.integers(1, 4**width))
    for k, qubit in enumerate(gate.qubits):
        letter = (code >> (2 * k)) & 3
        if letter:
            state = apply_single_qubit(state, qubit, _PAULIS[letter])
    return state


def _noisy_run(
    circuit: Circuit, state: StateVector, noise: NoiseModel, rng: np.random.Generator
) -> StateVector:
    for gate in circuit.gates:
        state = apply_gate(state, gate)
        p = noise.p1 if len(gate.qubits) == 1 else noise.p2
        if p and rng.random() < p:
            state = _pauli_error(state, gate, rng)
    return state


def _trajectory_rng(noise: NoiseModel, index: int) -> np.random.Generator:
    if noise.seed is None:
        raise SeedRequired("noisy simulation needs an explicit seed")
    return np.random.default_rng([noise.seed, index])


def _operators(observables: Mapping[str, PauliString]) -> dict[str, OperatorSum]:
    return {label: OperatorSum(s.n_sites, ((1.0, s),)) for label, s in observables.items()}


def _reduce(samples: np.ndarray) -> Estimate:
    n = samples.shape[0]
    stderr = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(mean=float(samples.mean()), stderr=stderr, trajectories=n)


def simulate_noisy(
    circuit: Circuit,
    initial: np.ndarray,
    noise: NoiseModel,
    observables: Mapping[str, PauliString],
) -> dict[str, Estimate]:
    """Trajectory means and standard errors of each observable at the circuit output.

    Trajectory ``k`` draws from ``default_rng([seed, k])``, so the table does not
    depend on how trajectories are scheduled.
    """
    start = _check_width(circuit, initial)
    ops = _operators(observables)
    if noise.is_ideal:
        final = simulate_ideal(circuit, start)
        return {label: Estimate(op.expectation(final), 0.0, 1) for label, op in ops.items()}
    samples = {label: np.empty(noise.trajectories) for label in ops}
    for k in range(noise.trajectories):
        final = _noisy_run(circuit, start, noise, _trajectory_rng(noise, k))
        for label, op in ops.items():
            samples[label][k] = op.expectation(final)
    log.debug("Noisy run: %d trajectories, %d gates", noise.trajectories, len(circuit))
    return {label: _reduce(values) for label, values in samples.items()}


def simulate(
    circuit: Circuit,
    initial: np.ndarray,
    noise: NoiseModel | None = None,
    observables: Mapping[str, PauliString] | None = None,
) -> StateVector | dict[str, Estimate]:
    """The output state without a noise model, else the sampled expectation table."""
    if noise is None:
        return simulate_ideal(circuit, initial)
    if not observables:
        raise CircuitError("noisy simulation needs at least one observable")
    return simulate_noisy(circuit, initial, noise, observables)


def simulate_dynamics(
    prep: Circuit,
    period: Circuit,
    initial: np.ndarray,
    n_periods: int,
    observables: Mapping[str, PauliString],
    noise: NoiseModel | None = None,
) -> dict[str, list[Estimate]]:
    """Expectations after prep and each of n = 0..n_periods periods.

    A noisy trajectory carries its state across periods, so errors accumulate
    the way they do on hardware.
    """
    if n_periods < 0:
        raise CircuitError(f"n_periods must be >= 0, got {n_periods}")
    noise = noise or NoiseModel()
    start = _check_width(prep, initial)
    ops = _operators(observables)
    runs = 1 if noise.is_ideal else noise.trajectories
    samples = {label: np.empty((runs, n_periods + 1)) for label in ops}
    for k in range(runs):
        rng = None if noise.is_ideal else _trajectory_rng(noise, k)
        state = simulate_ideal(prep, start) if rng is None else _noisy_run(prep, start, noise, rng)
        for n in range(n_periods + 1):
            if n:
                if rng is None:
                    state = simulate_ideal(period, state)
                else:
                    state = _noisy_run(period, state, noise, rng)
            for label, op in ops.items():
                samples[label][k, n] = op.expectation(state)
    return {
        label: [_reduce(values[:, n]) for n in range(n_periods + 1)]
        for label, values in samples.items()
    }


def echo_series(
    prep: Circuit,
    period: Circuit,
    initial: np.ndarray,
    n_periods: int,
    observables: Mapping[str, PauliString],
    noise: NoiseModel | None = None,
) -> dict[str, list[Estimate]]:
    """Expectations at the output of the n-period echo, n = 0..n_periods."""
    noise = noise or NoiseModel()
    rows: dict[str, list[Estimate]] = {label: [] for label in observables}
    for n in range(n_periods + 1):
        table = simulate_noisy(echo_circuit(prep, period, n), initial, noise, observables)
        for label, estimate in table.items():
            rows[label].append(estimate)
    return rows
