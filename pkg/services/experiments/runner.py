"""Experiment orchestration: one coroutine per experiment kind, all writing into
``<out>/<kind>-<fingerprint[:12]>/``.
"""
from __future__ import annotations

import asyncio
import logging
import math
import time
from collections.abc import Awaitable, Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from models.lattice import Lattice
from models.state import all_up
from services.analysis import (
    LatticeSpec,
    Lifetime,
    LifetimeJob,
    LifetimeRow,
    PhaseRow,
    dimerization_jobs,
    duality_boundaries,
    duality_jobs,
    duality_relation_check,
    duality_samples,
    frequency_jobs,
    gap_table,
    lifetime,
    phase_boundary,
    phase_jobs,
    prepare_initial,
    run_lifetime_job,
    run_phase_job,
    size_crossings,
)
from services.circuits import (
    Circuit,
    Estimate,
    compile_floquet_period,
    compile_ugs,
    echo_series,
    simulate_dynamics,
    to_text,
)
from services.engine import SolverStats
from services.experiments.persistence import (
    atomic_write,
    write_estimates,
    write_manifest,
    write_series,
    write_table,
)
from services.experiments.pool import WorkerPool
from services.experiments.run_config import ExperimentKind, RunConfig
from services.observables import (
    ObservableLabel,
    TimeSeries,
    autocorrelations,
    energy_series,
    resolve_observable,
)
from utils.errors import error_context

log = logging.getLogger("experiments")


@dataclass(slots=True)
class RunResult:
    fingerprint: str
    kind: str
    out_dir: Path
    files: list[Path] = field(default_factory=list)
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    series: dict[str, TimeSeries] = field(default_factory=dict)
    estimates: dict[str, list[Estimate]] = field(default_factory=dict)
    censored: dict[str, bool] = field(default_factory=dict)
    extras: dict[str, Any] = field(default_factory=dict)
    stats: dict[str, float] = field(default_factory=dict)
    wall_clock: float = 0.0

    def add_table(self, name: str, columns: Sequence[str], rows: list[Sequence[Any]], path: Path) -> None:
        self.tables[name] = [dict(zip(columns, row, strict=True)) for row in rows]
        self.files.append(path)


def _pauli_labels(observables: Sequence[str]) -> list[str]:
    return [o for o in observables if ObservableLabel.parse(o) is not ObservableLabel.ENERGY]


def _merge_stats(parts: Sequence[Mapping[str, float]]) -> dict[str, float]:
    total = SolverStats()
    for part in parts:
        total.merge(SolverStats(**part))
    return total.as_dict()


def _table_meta(config: RunConfig, **extra: Any) -> dict[str, Any]:
    return {"fingerprint": config.fingerprint, **config.protocol.as_dict(), **extra}


def _lifetime_columns(labels: Sequence[str]) -> list[str]:
    return [c for label in labels for c in (f"tau_{label}", f"censored_{label}")]


def _lifetime_cells(lifetimes: Mapping[str, Lifetime], labels: Sequence[str]) -> list[Any]:
    return [c for label in labels for c in (lifetimes[label].tau, lifetimes[label].censored)]


def _note_censoring(result: RunResult, key: str, lifetimes: Mapping[str, Lifetime]) -> None:
    for label, lt in lifetimes.items():
        result.censored[f"{key}:{label}"] = lt.censored
        if lt.censored:
            log.warning("Lifetime of %s at %s is censored at the end of the run", label, key)


async def _dynamics(config: RunConfig, result: RunResult) -> None:
    exp = config.experiment
    lattice = config.lattice.build()
    stats = SolverStats()
    seed = config.solver_seed
    with error_context("engine"):
        initial = await asyncio.to_thread(
            prepare_initial,
            lattice, config.protocol, exp.initial, labels=exp.product_state or None, seed=seed, stats=stats,
        )
    labels = _pauli_labels(exp.observables)
    with error_context("observables"):
        paulis = {label: resolve_observable(lattice, label) for label in labels}
        series = await asyncio.to_thread(
            autocorrelations,
            lattice, config.protocol, initial, paulis, exp.n_max, tol=config.tol, stats=stats,
        )
        if ObservableLabel.ENERGY.value in exp.observables:
            series["energy"] = await asyncio.to_thread(
                energy_series,
                lattice, config.protocol, initial, exp.n_max, tol=config.tol, seed=seed, stats=stats,
            )
    with error_context("analysis"):
        lifetimes = {label: lifetime(series[label], exp.threshold, exp.window) for label in labels}
    _note_censoring(result, "dynamics", lifetimes)
    result.extras["lifetimes"] = {k: {"tau": v.tau, "censored": v.censored} for k, v in lifetimes.items()}
    for label in exp.observables:
        result.series[label] = series[label]
        path = write_series(
            result.out_dir / f"{label}.csv", series[label], {"initial": exp.initial},
            fingerprint=config.fingerprint,
        )
        result.files.append(path)
    result.stats = stats.as_dict()


async def _lifetime_table(
    config: RunConfig,
    result: RunResult,
    name: str,
    key_column: str,
    specs: Sequence[LatticeSpec],
    jobs_of: Callable[[Lattice], list[LifetimeJob]],
) -> None:
    labels = _pauli_labels(config.experiment.observables)
    jobs: list[LifetimeJob] = []
    sizes: list[int] = []
    for spec in specs:
        lattice = spec.build()
        with error_context("analysis"):
            batch = jobs_of(lattice)
        jobs.extend(batch)
        sizes.extend([lattice.n_sites] * len(batch))
    async with WorkerPool(config.workers) as pool:
        with error_context("analysis"):
            rows: list[LifetimeRow] = await pool.map(run_lifetime_job, jobs)
    columns = ["n_sites", key_column, *_lifetime_columns(labels)]
    table = []
    for n_sites, row in zip(sizes, rows, strict=True):
        table.append([n_sites, row.key, *_lifetime_cells(row.lifetimes, labels)])
        _note_censoring(result, f"{key_column}={row.key:g}/n={n_sites}", row.lifetimes)
        for label, series in row.series.items():
            path = write_series(
                result.out_dir / f"{key_column}{row.key:g}_n{n_sites}_{label}.csv",
                series,
                {"initial": config.experiment.initial, "n_sites": n_sites},
                fingerprint=config.fingerprint,
            )
            result.series[path.stem] = series
            result.files.append(path)
    path = write_table(result.out_dir / f"{name}.csv", columns, table, _table_meta(config))
    result.add_table(name, columns, table, path)
    result.stats = _merge_stats([row.stats for row in rows])


async def _frequency_sweep(config: RunConfig, result: RunResult) -> None:
    exp = config.experiment
    await _lifetime_table(
        config, result, "frequency_sweep", "omega", config.lattice.specs(),
        lambda lattice: frequency_jobs(
            lattice, config.protocol, exp.omegas, exp.observables, exp.n_max,
            initial=exp.initial, threshold=exp.threshold, window=exp.window, tol=config.tol,
            seed=config.solver_seed,
        ),
    )


async def _dimerization_sweep(config: RunConfig, result: RunResult) -> None:
    exp = config.experiment
    await _lifetime_table(
        config, result, "dimerization_sweep", "eta", [config.lattice.spec],
        lambda lattice: dimerization_jobs(
            lattice, config.protocol, exp.etas, exp.n_max,
            observables=exp.observables, initial=exp.initial,
            threshold=exp.threshold, window=exp.window, tol=config.tol, seed=config.solver_seed,
        ),
    )


def _nan_if_none(value: float | None) -> float:
    return math.nan if value is None else value


async def _duality(config: RunConfig, result: RunResult, pool: WorkerPool) -> None:
    """Trivial-phase onsets at V_zz = v and 1/v on the main lattice, then the f1/f2 relation."""
    exp = config.experiment
    with error_context("analysis"):
        jobs = duality_jobs(
            config.lattice.build(), config.protocol, exp.duality_points, exp.duality_grid,
            seed=config.solver_seed,
        )
    with error_context("observables"):
        rows = await pool.map(run_phase_job, jobs)
    with error_context("analysis"):
        boundaries = duality_boundaries(exp.duality_points, rows)
        f1_samples, f2_samples = duality_samples(boundaries)
        complete = len(f1_samples) == len(boundaries)
        violation = duality_relation_check(f1_samples, f2_samples) if complete else None
    if not complete:
        log.warning("Duality relation skipped: a V_xx line never reached the trivial phase")
    columns = ["v", "f1", "inv_v", "f2"]
    table = [[b.v, _nan_if_none(b.f1), 1.0 / b.v, _nan_if_none(b.f2)] for b in boundaries]
    path = write_table(result.out_dir / "duality.csv", columns, table, _table_meta(config))
    result.add_table("duality", columns, table, path)
    result.extras["duality"] = [{"v": b.v, "f1": b.f1, "f2": b.f2} for b in boundaries]
    result.extras["duality_violation"] = violation


async def _phase_scan(config: RunConfig, result: RunResult) -> None:
    exp = config.experiment
    jobs = []
    for spec in config.lattice.specs():
        with error_context("analysis"):
            jobs.extend(phase_jobs(
                spec.build(), config.protocol, exp.scan_parameter, exp.scan_grid, seed=config.solver_seed
            ))
    async with WorkerPool(config.workers) as pool:
        with error_context("observables"):
            rows = await pool.map(run_phase_job, jobs)
        if exp.duality_points:
            await _duality(config, result, pool)
    columns = ["n_sites", exp.scan_parameter, "o_m", "zz", "xx"]
    table = [[r.n_sites, r.key, r.o_m, r.zz, r.xx] for r in rows]
    path = write_table(result.out_dir / "phase_scan.csv", columns, table, _table_meta(config))
    result.add_table("phase_scan", columns, table, path)
    by_size: dict[int, list[PhaseRow]] = {}
    for r in rows:
        by_size.setdefault(r.n_sites, []).append(r)
    with error_context("analysis"):
        if len(by_size) >= 2:
            result.extras["size_crossings"] = {f: size_crossings(rows, f) for f in ("o_m", "zz", "xx")}
        if exp.scan_parameter == "v_xx":
            result.extras["trivial_onset"] = {str(n): phase_boundary(rs) for n, rs in by_size.items()}


async def _gap(config: RunConfig, result: RunResult) -> None:
    lattices = [spec.build() for spec in config.lattice.specs()]
    with error_context("engine"):
        rows = await asyncio.to_thread(gap_table, lattices, config.protocol, seed=config.solver_seed)
    columns = ["distance", "gap", "tau_l", "n_sites"]
    table = [[r.distance, r.gap, r.tau_l, r.n_sites] for r in rows]
    path = write_table(result.out_dir / "gap.csv", columns, table, _table_meta(config))
    result.add_table("gap", columns, table, path)


def compile_circuits(config: RunConfig) -> tuple[Circuit, Circuit]:
    """(preparation, one drive period) for the configured lattice and protocol."""
    lattice = config.lattice.build()
    circ = config.circuit
    with error_context("circuits"):
        period = compile_floquet_period(
            lattice, config.protocol, circ.substeps, circ.convention, circ.perturbations
        )
        prep = compile_ugs(lattice) if circ.prepare == "ground" else Circuit(lattice.n_sites)
    return prep, period


async def _circuit_run(config: RunConfig, result: RunResult) -> None:
    exp = config.experiment
    lattice = config.lattice.build()
    prep, period = compile_circuits(config)
    paulis = {label: resolve_observable(lattice, label) for label in exp.observables}
    echo = config.kind is ExperimentKind.ECHO
    runs = [("echo", echo_series)] if echo else [("circuit", simulate_dynamics)]
    if config.circuit.with_echo and not echo:
        runs.append(("echo", echo_series))
    meta = {
        "fingerprint": config.fingerprint,
        "p1": config.noise.p1,
        "p2": config.noise.p2,
        "seed": config.seed if config.seed is not None else "none",
    }
    for prefix, simulate in runs:
        with error_context("circuits"):
            table = await asyncio.to_thread(
                simulate, prep, period, all_up(lattice.n_sites), exp.n_max, paulis, config.noise
            )
        for label, estimates in table.items():
            result.estimates[f"{prefix}_{label}"] = estimates
            path = write_estimates(result.out_dir / f"{prefix}_{label}.csv", label, estimates, meta)
            result.files.append(path)
    result.files.append(atomic_write(result.out_dir / "period.circuit", to_text(period)))
    result.extras["circuit"] = {
        "gates": len(period),
        "depth": period.depth,
        "two_qubit_gates": len(period.two_qubit_gates()),
        "prep_gates": len(prep),
    }


_RUNNERS: dict[ExperimentKind, Callable[[RunConfig, RunResult], Awaitable[None]]] = {
    ExperimentKind.DYNAMICS: _dynamics,
    ExperimentKind.FREQUENCY_SWEEP: _frequency_sweep,
    ExperimentKind.DIMERIZATION_SWEEP: _dimerization_sweep,
    ExperimentKind.PHASE_SCAN: _phase_scan,
    ExperimentKind.GAP: _gap,
    ExperimentKind.CIRCUIT_DYNAMICS: _circuit_run,
    ExperimentKind.ECHO: _circuit_run,
}


async def run_experiment(config: RunConfig) -> RunResult:
    """Run ``config`` and write its CSVs and manifest; returns what was written."""
    out_dir = config.output_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    result = RunResult(fingerprint=config.fingerprint, kind=config.kind.value, out_dir=out_dir)
    log.info("Run %s started: %s (workers=%d)", config.fingerprint[:12], config.kind.value, config.workers)
    started = time.perf_counter()
    await _RUNNERS[config.kind](config, result)
    result.wall_clock = time.perf_counter() - started
    manifest = {
        "config": config.resolved(),
        "fingerprint": config.fingerprint,
        "kind": config.kind.value,
        "files": [p.name for p in result.files],
        "wall_clock_seconds": result.wall_clock,
        "solver_stats": result.stats,
        "censored": result.censored,
        "results": result.extras,
    }
    result.files.append(write_manifest(out_dir, manifest))
    log.info("Run %s finished in %.1fs -> %s", config.fingerprint[:12], result.wall_clock, out_dir)
    return result


def run(config: RunConfig) -> RunResult:
    return asyncio.run(run_experiment(config))
