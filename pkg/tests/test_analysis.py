import math

import numpy as np
import pytest

from models.protocol import FloquetProtocol
from services.analysis import (
    AnalysisError,
    DualityRow,
    EmptySeries,
    GridMismatch,
    LatticeSpec,
    PhaseRow,
    beat_frequency,
    centered_moving_average,
    dimerization_jobs,
    duality_boundaries,
    duality_jobs,
    duality_relation_check,
    duality_samples,
    find_local_minima,
    frequency_jobs,
    frequency_sweep,
    gap_table,
    lifetime,
    locate_crossings,
    phase_boundary,
    phase_jobs,
    phase_scan,
    point_a_estimate,
    prepare_initial,
    run_phase_job,
    size_crossings,
    sweeps,
)
from services.observables import TimeSeries


def _decaying(n_max: int, rate: float, period: float = 1.0) -> TimeSeries:
    n = np.arange(n_max + 1)
    return TimeSeries("corner_z", np.where(n % 2 == 0, 1.0, -1.0) * np.exp(-n / rate), period)


def test_moving_average_truncates_at_the_ends():
    out = centered_moving_average(np.array([1.0, 2.0, 3.0, 4.0, 5.0]), 3)
    assert np.allclose(out, [1.5, 2.0, 3.0, 4.0, 4.5])
    assert np.allclose(centered_moving_average(np.arange(4.0), 1), np.arange(4.0))
    with pytest.raises(AnalysisError):
        centered_moving_average(np.ones(3), 0)


def test_lifetime_of_exponential_envelope():
    lt = lifetime(_decaying(100, 20.0, period=0.5), threshold=1 / math.e, window=1)
    assert not lt.censored
    assert lt.crossing == 20
    assert lt.tau == pytest.approx(10.0)


def test_lifetime_is_censored_when_it_never_decays():
    lt = lifetime(_decaying(50, 1e9, period=2.0))
    assert lt.censored
    assert lt.tau == pytest.approx(100.0)


def test_lifetime_rejects_bad_input():
    with pytest.raises(EmptySeries):
        lifetime(TimeSeries("x", np.array([]), 1.0))
    with pytest.raises(AnalysisError):
        lifetime(_decaying(10, 5.0), threshold=1.5)


def test_beat_frequency():
    n = np.arange(200)
    values = np.where(n % 2 == 0, 1.0, -1.0) * np.cos(0.1 * n)
    assert beat_frequency(TimeSeries("bulk_z", values, 1.0)) == pytest.approx(0.1, rel=1e-2)
    assert beat_frequency(_decaying(10, 5.0)) is None


def test_local_minima_and_crossings():
    assert find_local_minima(np.arange(5.0), np.array([3.0, 1.0, 2.0, 0.0, 5.0])) == [1.0, 3.0]
    assert locate_crossings(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 2.0]), np.ones(3)) == [1.0]
    assert locate_crossings(np.array([0.0, 1.0]), np.array([0.0, 2.0]), np.array([1.0, 0.0])) == [
        pytest.approx(1 / 3)
    ]
    with pytest.raises(AnalysisError):
        find_local_minima(np.arange(3.0), np.arange(4.0))


def test_phase_boundary():
    rows = [
        PhaseRow(0.0, o_m=1.0, zz=0.0, xx=0.0, n_sites=12),
        PhaseRow(1.0, o_m=0.8, zz=0.1, xx=0.5, n_sites=12),
        PhaseRow(2.0, o_m=0.2, zz=0.1, xx=1.0, n_sites=12),
    ]
    assert phase_boundary(rows) == pytest.approx(1 + 0.3 / 1.1)
    assert phase_boundary(rows[:2]) is None
    with pytest.raises(AnalysisError):
        phase_boundary([])


def test_duality_relation():
    f1 = [(0.5, 0.25), (2.0, 1.0)]
    f2 = [(2.0, 0.5), (0.5, 0.5)]
    assert duality_relation_check(f1, f2) == pytest.approx(0.0)
    assert point_a_estimate(f1, f2) == (0.25, pytest.approx(0.25))
    with pytest.raises(GridMismatch):
        duality_relation_check(f1, [(3.0, 0.5), (0.5, 0.5)])
    with pytest.raises(GridMismatch):
        duality_relation_check([(0.0, 1.0)], [(1.0, 1.0)])


def test_initial_state_policies(lattice8, ideal):
    assert prepare_initial(lattice8, ideal, "all_up")[0] == 1.0
    v = prepare_initial(lattice8, ideal, "product", labels="1" + "0" * 7)
    assert v[1] == 1.0
    with pytest.raises(AnalysisError):
        prepare_initial(lattice8, ideal, "product", labels="01")
    with pytest.raises(AnalysisError):
        prepare_initial(lattice8, ideal, "thermal")


def test_job_builders(lattice12):
    p = FloquetProtocol.dimerized()
    jobs = frequency_jobs(lattice12, p, [2.0, 4.0], ["corner_z"], 10)
    assert [j.protocol.omega for j in jobs] == [2.0, 4.0]
    assert jobs[0].lattice == LatticeSpec((2, 3), (2, 3), (0.5, 0.5))
    with pytest.raises(AnalysisError):
        frequency_jobs(lattice12, p, [2.0], ["corner_z"], 10)

    jobs = dimerization_jobs(lattice12, p, [0.5, 2.0], 10)
    assert [j.protocol.j_r for j in jobs] == [0.5, 2.0]
    assert all(j.protocol.j_b == 1.0 and j.initial == "all_up" for j in jobs)

    jobs = phase_jobs(lattice12, p, "v_xx", [0.0, 0.5])
    assert [j.protocol.v_xx for j in jobs] == [0.0, 0.5]
    with pytest.raises(AnalysisError):
        phase_jobs(lattice12, p, "v_xx", [0.5, 0.0])
    with pytest.raises(AnalysisError):
        phase_jobs(lattice12, p, "h_x", [0.0])


def test_small_frequency_sweep_keeps_job_order(lattice8, perturbed):
    rows = frequency_sweep(lattice8, perturbed, [4.0, 8.0], "corner_z", n_max=6, initial="all_up")
    assert [r.key for r in rows] == [4.0, 8.0]
    for row in rows:
        assert set(row.lifetimes) == {"corner_z"}
        assert len(row.series["corner_z"]) == 7


def test_phase_scan_on_small_lattice(lattice8):
    rows = phase_scan(lattice8, FloquetProtocol.ideal(), "v_zz", [0.0, 0.5])
    assert [r.key for r in rows] == [0.0, 0.5]
    assert rows[0].o_m == pytest.approx(-1.0, abs=1e-8)
    assert all(r.n_sites == 8 for r in rows)


def test_gap_table_sorted_by_distance(lattice8, lattice12, perturbed):
    rows = gap_table([lattice12, lattice8], perturbed)
    assert [r.n_sites for r in rows] == [8, 12]
    for row in rows:
        assert row.gap >= 0.0
        if row.gap > 0:
            assert row.tau_l == pytest.approx(2 * math.pi / row.gap)


def test_lifetime_ignores_sign_and_samples_after_the_decay():
    series = _decaying(60, 8.0, period=0.5)
    base = lifetime(series)
    assert not base.censored
    flipped = TimeSeries(series.label, -series.values, series.period)
    longer = TimeSeries(series.label, np.concatenate([series.values, np.zeros(40)]), series.period)
    assert lifetime(flipped) == base
    assert lifetime(longer) == base


def _phase_line(keys, o_m, n_sites=8, xx=None):
    xx = xx if xx is not None else [0.0] * len(keys)
    return [PhaseRow(k, o_m=m, zz=0.0, xx=x, n_sites=n_sites) for k, m, x in zip(keys, o_m, xx, strict=True)]


def test_size_crossings():
    grid = [0.0, 1.0, 2.0]
    rows = _phase_line(grid, [-1.0, -0.6, -0.2], n_sites=8) + _phase_line(grid, [1.1, 0.5, 0.0], n_sites=12)
    assert size_crossings(rows, "o_m") == [pytest.approx(0.5)]
    with pytest.raises(GridMismatch):
        size_crossings(rows[:3], "o_m")
    with pytest.raises(GridMismatch):
        size_crossings(rows[:3] + _phase_line([0.0, 1.0, 3.0], [1.1, 0.5, 0.0], n_sites=12), "o_m")


def test_duality_boundaries_from_scan_rows():
    grid = [0.0, 1.0, 2.0]
    rows = [
        *_phase_line(grid, [0.4] * 3, xx=[0.0, 1.0, 2.0]),  # f1(0.5) = 0.4
        *_phase_line(grid, [0.4] * 3, xx=[0.0, 0.5, 1.0]),  # f2(2) = 0.8
        *_phase_line(grid, [0.4] * 3),
        *_phase_line(grid, [0.4] * 3, xx=[0.0, 0.5, 1.0]),
    ]
    boundaries = duality_boundaries([0.5, 0.8], rows)
    assert boundaries[0] == DualityRow(0.5, pytest.approx(0.4), pytest.approx(0.8))
    assert boundaries[1].f1 is None
    f1, f2 = duality_samples(boundaries)
    assert f1 == [(0.5, pytest.approx(0.4))]
    assert f2 == [(2.0, pytest.approx(0.8))]
    assert duality_relation_check(f1, f2) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(GridMismatch):
        duality_boundaries([0.5], rows[:5])


def test_duality_jobs_scan_both_lines_per_point(lattice8, ideal):
    jobs = duality_jobs(lattice8, ideal, [0.5, 0.8], [0.0, 1.0], seed=3)
    assert [j.protocol.v_zz for j in jobs] == pytest.approx([0.5, 0.5, 2.0, 2.0, 0.8, 0.8, 1.25, 1.25])
    assert [j.protocol.v_xx for j in jobs] == [0.0, 1.0] * 4
    assert {j.seed for j in jobs} == {3}
    with pytest.raises(AnalysisError):
        duality_jobs(lattice8, ideal, [], [0.0])
    with pytest.raises(AnalysisError):
        duality_jobs(lattice8, ideal, [-0.5], [0.0])
    with pytest.raises(AnalysisError):
        duality_jobs(lattice8, ideal, [0.5], [1.0, 0.0])


def test_phase_job_threads_the_seed(lattice8, ideal, monkeypatch):
    seeds = []
    real = sweeps.order_parameters

    def recording(lattice, h, *, seed=0, stats=None):
        seeds.append(seed)
        return real(lattice, h, seed=seed, stats=stats)

    monkeypatch.setattr(sweeps, "order_parameters", recording)
    job = phase_jobs(lattice8, ideal, "v_zz", [0.0], seed=7)[0]
    assert run_phase_job(job).o_m == pytest.approx(-1.0, abs=1e-8)
    assert seeds == [7]


@pytest.mark.slow
def test_perturbed_corner_outlives_slow_drive_tenfold(lattice12, perturbed):
    rows = frequency_sweep(lattice12, perturbed, [1.0, 4.0], "corner_z", n_max=400)
    tau = {row.key: row.lifetimes["corner_z"].tau for row in rows}
    assert tau[4.0] >= 10 * tau[1.0]
