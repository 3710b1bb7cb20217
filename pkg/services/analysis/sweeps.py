"""Parameter sweeps as lists of independent, picklable jobs.

Each sweep builds its jobs, hands them to a mapper (the plain in-process map by
default, a process pool in the experiment runner) and returns rows in job order.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from typing import TypeVar

import numpy as np

from models.lattice import Lattice
from models.protocol import FloquetProtocol
from models.state import all_up, product_state
from services.analysis.lifetime import lifetime
from services.analysis.models import (
    DEFAULT_THRESHOLD,
    DEFAULT_WINDOW,
    AnalysisError,
    GapRow,
    LatticeSpec,
    LifetimeJob,
    LifetimeRow,
    PhaseJob,
    PhaseRow,
)
from services.engine import SolverStats, finite_size_gap, select_corner_polarized
from services.hamiltonians import build_heff, effective_generator
from services.observables import (
    ObservableLabel,
    autocorrelations,
    energy_series,
    order_parameters,
    resolve_observable,
)

log = logging.getLogger("analysis")

J = TypeVar("J")
R = TypeVar("R")
Mapper = Callable[[Callable[[J], R], Sequence[J]], list[R]]

INITIAL_POLICIES = ("ground", "all_up", "product")
SCAN_PARAMETERS = ("v_zz", "v_xx")


def serial_map(fn: Callable[[J], R], jobs: Sequence[J]) -> list[R]:
    return [fn(job) for job in jobs]


def prepare_initial(
    lattice: Lattice,
    protocol: FloquetProtocol,
    policy: str,
    *,
    labels: str | None = None,
    seed: int = 0,
    stats: SolverStats | None = None,
) -> np.ndarray:
    """``ground``: corner-polarized low state of H_eff; ``all_up``: |0...0>;
    ``product``: one label in {0, 1, +, -} per site.
    """
    if policy == "ground":
        return select_corner_polarized(lattice, build_heff(lattice, protocol), seed=seed, stats=stats)
    if policy == "all_up":
        return all_up(lattice.n_sites)
    if policy == "product":
        if labels is None or len(labels) != lattice.n_sites:
            raise AnalysisError(f"product policy needs {lattice.n_sites} site labels, got {labels!r}")
        return product_state(labels)
    raise AnalysisError(f"unknown initial-state policy {policy!r} (expected one of {INITIAL_POLICIES})")


def run_lifetime_job(job: LifetimeJob) -> LifetimeRow:
    lattice = job.lattice.build()
    stats = SolverStats()
    initial = prepare_initial(lattice, job.protocol, job.initial, seed=job.seed, stats=stats)
    labels = [ObservableLabel.parse(label) for label in job.observables]
    paulis = {
        label.value: resolve_observable(lattice, label)
        for label in labels
        if label is not ObservableLabel.ENERGY
    }
    series = autocorrelations(lattice, job.protocol, initial, paulis, job.n_max, tol=job.tol, stats=stats)
    lifetimes = {name: lifetime(s, job.threshold, job.window) for name, s in series.items()}
    if ObservableLabel.ENERGY in labels:
        series["energy"] = energy_series(
            lattice, job.protocol, initial, job.n_max, tol=job.tol, seed=job.seed, stats=stats
        )
    log.info(
        "Lifetime point key=%.4g done: %s",
        job.key,
        ", ".join(f"{k}={v.tau:.4g}{'+' if v.censored else ''}" for k, v in lifetimes.items()),
    )
    return LifetimeRow(key=job.key, lifetimes=lifetimes, series=series, stats=stats.as_dict())


def frequency_jobs(
    lattice: Lattice,
    protocol: FloquetProtocol,
    omegas: Sequence[float],
    observables: Sequence[str],
    n_max: int,
    *,
    initial: str = "ground",
    threshold: float = DEFAULT_THRESHOLD,
    window: int = DEFAULT_WINDOW,
    tol: float = 1e-9,
    seed: int = 0,
) -> list[LifetimeJob]:
    if len(omegas) < 2:
        raise AnalysisError(f"a frequency sweep needs at least two frequencies, got {len(omegas)}")
    spec = LatticeSpec.of(lattice)
    return [
        LifetimeJob(
            key=float(omega),
            lattice=spec,
            protocol=protocol.replace(omega=omega),
            observables=tuple(observables),
            n_max=n_max,
            initial=initial,
            threshold=threshold,
            window=window,
            tol=tol,
            seed=seed,
        )
        for omega in omegas
    ]


def frequency_sweep(
    lattice: Lattice,
    protocol: FloquetProtocol,
    omegas: Sequence[float],
    observable: str = "corner_z",
    n_max: int = 1000,
    *,
    initial: str = "ground",
    threshold: float = DEFAULT_THRESHOLD,
    window: int = DEFAULT_WINDOW,
    seed: int = 0,
    mapper: Mapper | None = None,
) -> list[LifetimeRow]:
    """One lifetime row per drive frequency, same initial-state policy on every row."""
    jobs = frequency_jobs(
        lattice, protocol, omegas, (observable,), n_max,
        initial=initial, threshold=threshold, window=window, seed=seed,
    )
    return (mapper or serial_map)(run_lifetime_job, jobs)


def dimerization_jobs(
    lattice: Lattice,
    protocol: FloquetProtocol,
    etas: Sequence[float],
    n_max: int,
    *,
    observables: Sequence[str] = ("corner_z", "bulk_z"),
    initial: str = "all_up",
    threshold: float = DEFAULT_THRESHOLD,
    window: int = DEFAULT_WINDOW,
    tol: float = 1e-9,
    seed: int = 0,
) -> list[LifetimeJob]:
    if not etas:
        raise AnalysisError("empty eta grid")
    spec = LatticeSpec.of(lattice)
    return [
        LifetimeJob(
            key=float(eta),
            lattice=spec,
            protocol=protocol.with_eta(eta),
            observables=tuple(observables),
            n_max=n_max,
            initial=initial,
            threshold=threshold,
            window=window,
            tol=tol,
            seed=seed,
        )
        for eta in etas
    ]


def dimerization_sweep(
    lattice: Lattice,
    protocol: FloquetProtocol,
    etas: Sequence[float],
    n_max: int = 1000,
    *,
    observables: Sequence[str] = ("corner_z", "bulk_z"),
    threshold: float = DEFAULT_THRESHOLD,
    window: int = DEFAULT_WINDOW,
    seed: int = 0,
    mapper: Mapper | None = None,
) -> list[LifetimeRow]:
    """Corner and bulk lifetimes from |0...0> across J_r / J_b at fixed J_b."""
    jobs = dimerization_jobs(
        lattice, protocol, etas, n_max,
        observables=observables, threshold=threshold, window=window, seed=seed,
    )
    return (mapper or serial_map)(run_lifetime_job, jobs)


def run_phase_job(job: PhaseJob) -> PhaseRow:
    lattice = job.lattice.build()
    params = order_parameters(lattice, build_heff(lattice, job.protocol), seed=job.seed)
    return PhaseRow(key=job.key, o_m=params.o_m, zz=params.zz, xx=params.xx, n_sites=lattice.n_sites)


def _check_grid(parameter: str, grid: Sequence[float]) -> None:
    if list(grid) != sorted(grid):
        raise AnalysisError(f"{parameter} grid must be sorted ascending")


def phase_jobs(
    lattice: Lattice,
    protocol: FloquetProtocol,
    parameter: str,
    grid: Sequence[float],
    *,
    seed: int = 0,
) -> list[PhaseJob]:
    if parameter not in SCAN_PARAMETERS:
        raise AnalysisError(f"scan parameter must be one of {SCAN_PARAMETERS}, got {parameter!r}")
    _check_grid(parameter, grid)
    spec = LatticeSpec.of(lattice)
    return [
        PhaseJob(key=float(value), lattice=spec, protocol=protocol.replace(**{parameter: value}), seed=seed)
        for value in grid
    ]


def phase_scan(
    lattice: Lattice,
    protocol: FloquetProtocol,
    parameter: str,
    grid: Sequence[float],
    *,
    seed: int = 0,
    mapper: Mapper | None = None,
) -> list[PhaseRow]:
    """Ground-state order parameters along a V_zz or V_xx line."""
    return (mapper or serial_map)(run_phase_job, phase_jobs(lattice, protocol, parameter, grid, seed=seed))


def duality_jobs(
    lattice: Lattice,
    protocol: FloquetProtocol,
    points: Sequence[float],
    vxx_grid: Sequence[float],
    *,
    seed: int = 0,
) -> list[PhaseJob]:
    """V_xx lines at V_zz = v and V_zz = 1/v for every v, in that order, one line after the other."""
    if not points or not vxx_grid:
        raise AnalysisError("duality scan needs V_zz points and a V_xx grid")
    if any(v <= 0 for v in points):
        raise AnalysisError(f"duality points must be > 0, got {list(points)}")
    _check_grid("v_xx", vxx_grid)
    jobs: list[PhaseJob] = []
    for v in points:
        for v_zz in (v, 1.0 / v):
            jobs.extend(phase_jobs(lattice, protocol.replace(v_zz=v_zz), "v_xx", vxx_grid, seed=seed))
    return jobs


def gap_table(lattices: Sequence[Lattice], protocol: FloquetProtocol, *, seed: int = 0) -> list[GapRow]:
    """(corner distance, splitting, 2 pi / splitting) per lattice, by increasing distance."""
    rows: list[GapRow] = []
    for lattice in lattices:
        gap = finite_size_gap(effective_generator(lattice, protocol), seed=seed)
        tau = 2 * math.pi / gap if gap > 0 else math.inf
        rows.append(GapRow(distance=lattice.corner_distance, gap=gap, tau_l=tau, n_sites=lattice.n_sites))
        log.info("Gap on %d sites: distance=%.3f gap=%.3e", lattice.n_sites, lattice.corner_distance, gap)
    return sorted(rows, key=lambda r: (r.distance, r.n_sites))
