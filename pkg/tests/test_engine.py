import math

import numpy as np
import pytest
import scipy.linalg
from scipy.sparse.linalg import expm_multiply

from models.pauli import OperatorSum, PauliString
from models.protocol import FloquetProtocol
from models.state import random_state
from services.analysis import beat_frequency, centered_moving_average
from services.engine import (
    EngineError,
    FloquetPropagator,
    SolverStats,
    corner_beat_gap,
    finite_size_gap,
    ground_state,
    half_period_pulse,
    krylov_evolve,
    sector_ground_state,
    select_corner_polarized,
)
from services.hamiltonians import build_drive, build_heff, corner_operators, effective_generator
from services.observables import TimeSeries, autocorrelation, resolve_observable


def test_iterative_matches_dense(lattice8, perturbed):
    h = build_heff(lattice8, perturbed)
    dense_values, _ = ground_state(h, 4)
    stats = SolverStats()
    values, vectors = ground_state(h, 4, dense_max_dim=0, stats=stats)
    assert np.allclose(values, dense_values, atol=1e-8)
    assert np.allclose(vectors.conj().T @ vectors, np.eye(4), atol=1e-8)
    assert stats.matvecs > 0


def test_iterative_returns_whole_degenerate_manifold(lattice8, ideal):
    values, vectors = ground_state(build_heff(lattice8, ideal), 4, dense_max_dim=0)
    assert np.allclose(values, -6.0, atol=1e-8)
    assert np.linalg.matrix_rank(vectors, tol=1e-6) == 4


def test_wanted_count_is_bounded(lattice8, ideal):
    with pytest.raises(EngineError):
        ground_state(build_heff(lattice8, ideal), 9)


def test_sector_ground_state(lattice8, perturbed):
    h = build_heff(lattice8, perturbed)
    g_r, g_b = lattice8.symmetry_generators()
    _, vectors = sector_ground_state(h, (g_b, g_r), 1)
    state = vectors[:, 0]
    for g in (g_b, g_r):
        op = OperatorSum(8, ((1.0, g),))
        assert op.expectation(state) == pytest.approx(1.0, abs=1e-8)


def test_sector_must_be_conserved(lattice8, perturbed):
    z_tilde, _ = corner_operators(lattice8)
    with pytest.raises(EngineError):
        sector_ground_state(build_heff(lattice8, perturbed), (z_tilde,), 1)


def test_gap_of_perturbed_manifold_is_small(lattice8, perturbed):
    gap = finite_size_gap(build_heff(lattice8, perturbed).scaled(0.5))
    assert 0.0 <= gap < 1.0


@pytest.mark.parametrize("t", [0.3, -1.7, 5.0])
def test_krylov_matches_expm_multiply(lattice8, perturbed, rng, t):
    h2 = build_drive(lattice8, perturbed).h2
    v = random_state(8, rng)
    out = krylov_evolve(h2, v, t, 1e-10)
    expected = expm_multiply(-1j * t * h2.to_sparse().tocsc(), v)
    assert np.allclose(out, expected, atol=1e-8)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-10)


def test_krylov_edge_cases(lattice8, perturbed, rng):
    h2 = build_drive(lattice8, perturbed).h2
    v = random_state(8, rng)
    assert np.array_equal(krylov_evolve(h2, v, 0.0), v)
    with pytest.raises(EngineError):
        krylov_evolve(h2, v, 1.0, 1e-15)


def test_pulse_is_a_pi_rotation_without_error(ideal):
    assert half_period_pulse(ideal).rotation_angle == pytest.approx(math.pi)


def test_floquet_step_matches_dense(lattice8, perturbed, rng):
    h1, h2 = build_drive(lattice8, perturbed)
    half = perturbed.period / 2
    u = scipy.linalg.expm(-1j * half * h2.to_dense()) @ scipy.linalg.expm(-1j * half * h1.to_dense())
    v = random_state(8, rng)
    propagator = FloquetPropagator(lattice8, perturbed, tol=1e-10)
    assert np.allclose(propagator.step(v), u @ v, atol=1e-8)
    states = list(propagator.trajectory(v, 3))
    assert len(states) == 4
    assert np.allclose(states[2], u @ (u @ v), atol=1e-8)


def test_corner_polarized_state(lattice8, ideal):
    state = select_corner_polarized(lattice8, build_heff(lattice8, ideal))
    z_tilde, _ = corner_operators(lattice8)
    assert OperatorSum(8, ((1.0, z_tilde),)).expectation(state) == pytest.approx(1.0, abs=1e-8)
    assert build_heff(lattice8, ideal).expectation(state) == pytest.approx(-6.0, abs=1e-8)


def test_ideal_spectrum_on_twelve_sites(lattice12, ideal):
    values, _ = ground_state(effective_generator(lattice12, ideal), 5)
    assert np.allclose(values, [-5.0, -5.0, -5.0, -5.0, -4.0], atol=1e-8)


def _random_sum(n_sites: int, rng: np.random.Generator, n_terms: int = 10) -> OperatorSum:
    letters = "IXYZ"
    return OperatorSum(n_sites, tuple(
        (float(rng.normal()), PauliString.from_sites(
            {site: letters[rng.integers(4)] for site in range(n_sites)}, n_sites
        ))
        for _ in range(n_terms)
    ))


def test_krylov_matches_dense_exponential_on_random_draws(rng):
    for _ in range(20):
        n_sites = int(rng.integers(4, 9))
        h = _random_sum(n_sites, rng)
        t = float(rng.uniform(-3.0, 3.0))
        v = random_state(n_sites, rng)
        expected = scipy.linalg.expm(-1j * t * h.to_dense()) @ v
        assert np.max(np.abs(krylov_evolve(h, v, t, 1e-11) - expected)) <= 1e-9


def test_beat_gap_is_inside_the_manifold_spread(lattice8, perturbed):
    heff = effective_generator(lattice8, perturbed)
    assert 0.0 <= corner_beat_gap(lattice8, heff) <= finite_size_gap(heff) + 1e-9
    ideal_heff = effective_generator(lattice8, FloquetProtocol.ideal())
    assert corner_beat_gap(lattice8, ideal_heff) == pytest.approx(0.0, abs=1e-8)


@pytest.mark.slow
def test_corner_beat_follows_the_manifold_splitting(lattice8):
    p = FloquetProtocol.uniform(h_x=0.4, omega=80.0)
    heff = effective_generator(lattice8, p)
    gap = corner_beat_gap(lattice8, heff)
    assert gap > 0.0
    # run past the first zero of the envelope at t = pi / (2 gap)
    n_max = math.ceil(1.5 * math.pi / (2 * gap * p.period))
    assert n_max < 50_000
    initial = select_corner_polarized(lattice8, build_heff(lattice8, p))
    corner_z = resolve_observable(lattice8, "corner_z")
    series = autocorrelation(lattice8, p, initial, corner_z, n_max, tol=1e-10)
    # average over one cycle of the unit-energy excitations above the manifold
    window = 2 * round(math.pi / p.period) + 1
    stagger = np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0)
    envelope = centered_moving_average(series.staggered(), window)
    smooth = TimeSeries(series.label, stagger * envelope, series.period)
    assert beat_frequency(smooth) == pytest.approx(gap, rel=0.1)
