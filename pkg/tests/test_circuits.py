import math

import numpy as np
import pytest
import scipy.linalg
from scipy.sparse.linalg import expm_multiply

from models.lattice import Color, build_lattice
from models.pauli import OperatorSum, PauliString
from models.protocol import FloquetProtocol
from models.state import all_up, fidelity, random_state
from services.circuits import (
    Circuit,
    CircuitBuilder,
    CircuitError,
    CircuitParseError,
    Gate,
    GateName,
    NoiseModel,
    NonAdjacentGate,
    PulseConvention,
    SeedRequired,
    compile_floquet_period,
    compile_perturbations,
    compile_u1,
    compile_u2,
    compile_ugs,
    echo_circuit,
    echo_series,
    from_text,
    simulate,
    simulate_dynamics,
    simulate_ideal,
    simulate_noisy,
    to_text,
)
from services.engine import FloquetPropagator, half_period_pulse


def _adjacent_only(lattice, circuit):
    return all(g.qubits[1] in lattice.neighbors[g.qubits[0]] for g in circuit.two_qubit_gates())


@pytest.mark.parametrize("fixture", ["lattice8", "lattice12"])
def test_u2_is_exact(request, fixture, rng):
    lattice = request.getfixturevalue(fixture)
    p = FloquetProtocol(j_r=1.3, j_b=0.7)
    dt = 0.41
    h = OperatorSum(lattice.n_sites, tuple(
        (p.j_for(lattice.color(i) is Color.RED), lattice.stabilizer_support(i))
        for i in lattice.non_corner_sites
    ))
    v = random_state(lattice.n_sites, rng)
    expected = expm_multiply(-1j * dt * h.to_sparse().tocsc(), v)
    assert np.allclose(simulate_ideal(compile_u2(lattice, p, dt), v), expected, atol=1e-10)


def test_u2_depth_does_not_grow_with_size():
    p = FloquetProtocol.ideal()
    small = compile_u2(build_lattice((2, 3), (2, 3)), p, 0.1)
    large = compile_u2(build_lattice((3, 3), (3, 3)), p, 0.1)
    assert small.depth == large.depth
    assert len(large) > len(small)


def test_u1_matches_the_engine_pulse(lattice8, rng):
    p = FloquetProtocol.uniform(epsilon=0.07)
    v = random_state(8, rng)
    assert np.allclose(simulate_ideal(compile_u1(lattice8, p), v), half_period_pulse(p).apply(v))
    flipped = compile_u1(lattice8, p, PulseConvention.REVERSED)
    assert flipped.gates[0].angle == pytest.approx(math.pi - 0.07 * p.period)


def test_unperturbed_period_matches_propagator(lattice8, rng):
    p = FloquetProtocol(j_r=1.2, j_b=0.9, epsilon=0.05)
    v = random_state(8, rng)
    circuit = compile_floquet_period(lattice8, p)
    expected = FloquetPropagator(lattice8, p, tol=1e-11).step(v)
    assert np.allclose(simulate_ideal(circuit, v), expected, atol=1e-8)


def test_trotterized_period_converges(lattice8, rng):
    p = FloquetProtocol.perturbed(omega=8.0)
    v = random_state(8, rng)
    exact = FloquetPropagator(lattice8, p, tol=1e-11).step(v)
    errors = [
        np.linalg.norm(simulate_ideal(compile_floquet_period(lattice8, p, substeps), v) - exact)
        for substeps in (1, 4)
    ]
    assert errors[1] < errors[0]


def test_ground_state_preparation(lattice12):
    state = simulate_ideal(compile_ugs(lattice12), all_up(12))
    for i in lattice12.non_corner_sites:
        k = OperatorSum(12, ((1.0, lattice12.stabilizer_support(i)),))
        assert k.expectation(state) == pytest.approx(-1.0)
    for c in lattice12.corners:
        z = OperatorSum(12, ((1.0, PauliString.single(c, "Z", 12)),))
        assert z.expectation(state) == pytest.approx(1.0)


def test_every_compiled_gate_is_local(lattice12, perturbed):
    period = compile_floquet_period(lattice12, perturbed, substeps=2)
    assert _adjacent_only(lattice12, period)
    assert _adjacent_only(lattice12, compile_ugs(lattice12))
    assert period.gate_counts()["CX"] > 0


def test_non_adjacent_gate_is_refused(lattice12):
    builder = CircuitBuilder(lattice12)
    with pytest.raises(NonAdjacentGate):
        builder.two_qubit(GateName.CZ, [(0, 11)])


def test_empty_perturbation_parts(lattice8, perturbed):
    assert len(compile_perturbations(lattice8, perturbed, 0.1, ())) == 0
    with pytest.raises(CircuitError):
        compile_perturbations(lattice8, perturbed, 0.1, ("yy",))
    with pytest.raises(CircuitError):
        compile_u2(lattice8, perturbed, 0.0)


def test_zero_noise_echo_returns_the_initial_state(lattice8, perturbed):
    prep = compile_ugs(lattice8)
    period = compile_floquet_period(lattice8, perturbed)
    assert np.allclose(simulate_ideal(echo_circuit(prep, period, 2), all_up(8)), all_up(8), atol=1e-10)
    rows = echo_series(prep, period, all_up(8), 2, {"corner_z": PauliString.single(0, "Z", 8)})
    assert [e.mean for e in rows["corner_z"]] == pytest.approx([1.0, 1.0, 1.0])
    assert all(e.stderr == 0.0 for e in rows["corner_z"])


def test_ideal_circuit_dynamics_period_doubles(lattice8, ideal):
    prep = compile_ugs(lattice8)
    period = compile_floquet_period(lattice8, ideal)
    rows = simulate_dynamics(prep, period, all_up(8), 3, {"z": PauliString.single(0, "Z", 8)})
    assert [e.mean for e in rows["z"]] == pytest.approx([1.0, -1.0, 1.0, -1.0])


@pytest.mark.parametrize(
    "gate, p1, p2, expected",
    [
        (Gate(GateName.X, (0,)), 1.0, 0.0, 1.0 / 3.0),
        (Gate(GateName.CZ, (0, 1)), 0.0, 1.0, -1.0 / 15.0),
    ],
)
def test_noise_matches_the_depolarizing_average(gate, p1, p2, expected):
    n = 2
    circuit = Circuit(n, (gate,))
    noise = NoiseModel(p1, p2, trajectories=4000, seed=7)
    table = simulate_noisy(circuit, all_up(n), noise, {"z": PauliString.single(0, "Z", n)})
    estimate = table["z"]
    assert estimate.trajectories == 4000
    assert abs(estimate.mean - expected) < 5 * estimate.stderr + 1e-3


def test_noisy_runs_are_reproducible(lattice8, perturbed):
    period = compile_floquet_period(lattice8, perturbed)
    obs = {"z": PauliString.single(0, "Z", 8)}
    noise = NoiseModel(0.01, 0.02, trajectories=5, seed=3)
    a = simulate_dynamics(Circuit(8), period, all_up(8), 2, obs, noise)
    b = simulate_dynamics(Circuit(8), period, all_up(8), 2, obs, noise)
    assert a == b


def test_noise_needs_a_seed(lattice8, perturbed):
    period = compile_floquet_period(lattice8, perturbed)
    noise = NoiseModel(0.01, 0.0, trajectories=2)
    with pytest.raises(SeedRequired):
        simulate_noisy(period, all_up(8), noise, {"z": PauliString.single(0, "Z", 8)})


def test_simulate_dispatch(lattice8):
    circuit = compile_ugs(lattice8)
    assert simulate(circuit, all_up(8)).shape == (256,)
    with pytest.raises(CircuitError):
        simulate(circuit, all_up(8), NoiseModel())
    with pytest.raises(CircuitError):
        simulate(circuit, all_up(4))


def test_noise_model_validation():
    with pytest.raises(CircuitError):
        NoiseModel(p1=1.5)
    with pytest.raises(CircuitError):
        NoiseModel(trajectories=0)


def test_text_round_trip(lattice12, perturbed):
    period = compile_floquet_period(lattice12, perturbed)
    text = to_text(period)
    assert text.startswith("qubits 12\n# layer 0\n")
    assert from_text(text) == period


@pytest.mark.parametrize(
    "text, line",
    [
        ("qubits 2\nFOO 1\n", 2),
        ("qubits 2\nCZ 1\n", 2),
        ("qubits 2\nRX 1 abc\n", 2),
        ("qubits 2\n\nCZ 1 3\n", 3),
        ("RX 1 0.5\n", 1),
        ("qubits 2\n# layer x\n", 2),
        ("", 1),
    ],
)
def test_text_parse_errors(text, line):
    with pytest.raises(CircuitParseError) as err:
        from_text(text)
    assert err.value.line == line


def test_inverse_undoes_the_circuit(lattice8, perturbed, rng):
    period = compile_floquet_period(lattice8, perturbed)
    v = random_state(8, rng)
    assert np.allclose(simulate_ideal(period + period.inverse(), v), v, atol=1e-10)
    assert (period + period.inverse()).depth == 2 * period.depth


def _dense_step(h: OperatorSum, dt: float, v: np.ndarray) -> np.ndarray:
    return scipy.linalg.expm(-1j * dt * h.to_dense()) @ v


def test_transverse_field_part_is_exact(lattice8, rng):
    p = FloquetProtocol.uniform(h_x=0.37)
    dt = 0.29
    h = OperatorSum(8, tuple((p.h_x, PauliString.single(i, "X", 8)) for i in range(8)))
    v = random_state(8, rng)
    out = simulate_ideal(compile_perturbations(lattice8, p, dt, ("single",)), v)
    assert fidelity(out, _dense_step(h, dt, v)) == pytest.approx(1.0, abs=1e-10)


def test_plaquette_blocks_are_exact(lattice8, rng):
    p = FloquetProtocol.uniform(v_zz=0.45)
    dt = 0.31
    h = OperatorSum(8, tuple((p.v_zz, lattice8.plaquette_support(i)) for i in lattice8.non_corner_sites))
    v = random_state(8, rng)
    circuit = compile_perturbations(lattice8, p, dt, ("zz",))
    assert _adjacent_only(lattice8, circuit)
    assert fidelity(simulate_ideal(circuit, v), _dense_step(h, dt, v)) == pytest.approx(1.0, abs=1e-10)


def test_trotter_infidelity_is_first_order(lattice8, rng):
    p = FloquetProtocol.perturbed(omega=8.0)
    v = random_state(8, rng)
    exact = FloquetPropagator(lattice8, p, tol=1e-12).step(v)
    infidelity = {
        substeps: 1.0 - fidelity(simulate_ideal(compile_floquet_period(lattice8, p, substeps), v), exact)
        for substeps in (4, 8)
    }
    # state error ~ dt, so halving dt cuts the infidelity four-fold
    assert infidelity[4] / infidelity[8] == pytest.approx(4.0, rel=0.25)


@pytest.mark.slow
def test_noisy_deviation_is_linear_in_the_error_rate(lattice8, ideal):
    prep = compile_ugs(lattice8)
    circuit = prep + compile_floquet_period(lattice8, ideal)
    obs = {f"k{i}": lattice8.stabilizer_support(i) for i in lattice8.non_corner_sites}
    obs["corner_z"] = PauliString.single(lattice8.corners[0], "Z", 8)
    exact = simulate_noisy(circuit, all_up(8), NoiseModel(), obs)

    def deviation(p: float) -> float:
        table = simulate_noisy(circuit, all_up(8), NoiseModel(p, p, trajectories=2000, seed=21), obs)
        return float(np.mean([abs(table[k].mean - exact[k].mean) for k in obs]))

    assert deviation(0.0) == 0.0
    low, high = deviation(0.002), deviation(0.004)
    assert 0.0 < low < high
    assert 1.2 <= high / low <= 2.8
