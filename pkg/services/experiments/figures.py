"""Bundled desk-scale configs for the headline experiments and their pass/fail checks."""
from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from services.analysis import find_local_minima
from services.experiments.persistence import atomic_write
from services.experiments.run_config import RunConfig, load_config
from services.experiments.runner import RunResult, run_experiment
from services.observables import ideal_autocorrelation
from utils.errors import ExperimentError

log = logging.getLogger("experiments")

FIGURE_DIR = Path(__file__).with_name("figures")
SUMMARY = "summary.txt"
LIFETIME_RATIO = 10.0
BULK_RATIO = 2.0
CROSSING_WINDOW = 0.3
RESONANT_ETAS = (1.0, 3.0)
DUALITY_TOLERANCE = 0.2
CLOSED_FORM_TOL = 1e-8
# allowance on |dynamics| over sqrt(echo) beyond three standard errors
ENVELOPE_SLACK = 0.05


@dataclass(frozen=True, slots=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def figures() -> list[str]:
    return sorted(p.stem for p in FIGURE_DIR.glob("*.toml"))


def figure_config(name: str) -> RunConfig:
    path = FIGURE_DIR / f"{name}.toml"
    if not path.is_file():
        raise ExperimentError(f"unknown figure {name!r} (expected one of {', '.join(figures())})")
    return load_config(path)


def _column(rows: list[dict[str, Any]], key: str, value: str, **where: Any) -> dict[float, Any]:
    """{row[key]: row[value]} over the rows matching ``where``."""
    return {
        row[key]: row[value]
        for row in rows
        if all(row[k] == v for k, v in where.items())
    }


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else float("inf")


def _censor_note(rows: list[dict[str, Any]], label: str) -> str:
    n = sum(1 for r in rows if r.get(f"censored_{label}"))
    return f" ({n} censored point(s), ratios are lower bounds)" if n else ""


def _check_fig1b(result: RunResult) -> list[Check]:
    rows = result.tables["frequency_sweep"]
    tau = _column(rows, "omega", "tau_corner_z")
    ratio = _ratio(tau[4.0], tau[1.0])
    n_sites = rows[0]["n_sites"]
    slow = result.series[f"omega4_n{n_sites}_energy"].values[-1]
    fast = result.series[f"omega1_n{n_sites}_energy"].values[-1]
    return [
        Check(
            "lifetime grows with frequency",
            ratio >= LIFETIME_RATIO,
            f"tau(omega=4)/tau(omega=1) = {ratio:.3g} (need >= {LIFETIME_RATIO:g})"
            + _censor_note(rows, "corner_z"),
        ),
        Check(
            "high frequency absorbs less energy",
            slow < fast,
            f"final heating fraction {slow:.3f} at omega=4 vs {fast:.3f} at omega=1",
        ),
    ]


def _check_fig1c(result: RunResult) -> list[Check]:
    checks = []
    for label, series in result.series.items():
        expected = ideal_autocorrelation(label, series.n_max, series.protocol["j_b"], series.period)
        error = float(np.max(np.abs(series.values - expected)))
        checks.append(Check(
            f"{label} follows the closed form",
            error <= CLOSED_FORM_TOL,
            f"max deviation {error:.2e} over {series.n_max} periods (need <= {CLOSED_FORM_TOL:g})",
        ))
    return checks


def _check_fig1d(result: RunResult) -> list[Check]:
    rows = result.tables["frequency_sweep"]
    sizes = sorted({r["n_sites"] for r in rows})
    checks: list[Check] = []
    plateau: dict[int, float] = {}
    for n in sizes:
        tau = _column(rows, "omega", "tau_corner_z", n_sites=n)
        lo, hi = min(tau), max(tau)
        plateau[n] = tau[hi]
        checks.append(Check(
            f"lifetime rises with frequency on {n} sites",
            tau[hi] >= tau[lo],
            f"tau(omega={hi:g}) = {tau[hi]:.4g} vs tau(omega={lo:g}) = {tau[lo]:.4g}"
            + _censor_note([r for r in rows if r["n_sites"] == n], "corner_z"),
        ))
    if len(sizes) >= 2:
        small, large = sizes[0], sizes[-1]
        checks.append(Check(
            "plateau grows with size",
            plateau[large] >= plateau[small],
            f"high-frequency tau {plateau[large]:.4g} on {large} sites"
            f" vs {plateau[small]:.4g} on {small} sites",
        ))
    return checks


def _check_fig2ab(result: RunResult) -> list[Check]:
    crossings = result.extras.get("size_crossings", {})
    found = sorted([*crossings.get("o_m", []), *crossings.get("zz", [])])
    checks = []
    for target in (-1.0, 1.0):
        near = [c for c in found if abs(c - target) <= CROSSING_WINDOW]
        checks.append(Check(
            f"order parameters of two sizes cross near V_zz = {target:+g}",
            bool(near),
            f"crossings at {', '.join(f'{c:.3f}' for c in found) or 'none'} (window +-{CROSSING_WINDOW:g})",
        ))
    violation = result.extras.get("duality_violation")
    checks.append(Check(
        "trivial-phase boundaries are dual",
        violation is not None and violation <= DUALITY_TOLERANCE,
        "a boundary was not reached on the V_xx grid" if violation is None
        else f"max |f1(v)/v - f2(1/v)| = {violation:.3f} (need <= {DUALITY_TOLERANCE:g})",
    ))
    return checks


def _check_fig2c(result: RunResult) -> list[Check]:
    corner = result.extras["lifetimes"]["corner_z"]
    return [Check(
        "corner melts from |0...0>",
        not corner["censored"],
        f"corner tau = {corner['tau']:.4g}" + (" (censored)" if corner["censored"] else ""),
    )]


def _check_fig3ab(result: RunResult) -> list[Check]:
    rows = result.tables["dimerization_sweep"]
    corner = _column(rows, "eta", "tau_corner_z")
    bulk = _column(rows, "eta", "tau_bulk_z")
    top = max(corner)
    corner_ratio = _ratio(corner[top], corner[1.0])
    bulk_ratio = max(bulk[top], bulk[1.0]) / max(min(bulk[top], bulk[1.0]), 1e-300)
    etas = np.array(sorted(corner))
    minima = find_local_minima(etas, np.array([corner[e] for e in etas]))
    missing = [e for e in RESONANT_ETAS if not any(abs(m - e) < 1e-9 for m in minima)]
    return [
        Check(
            "dimerization protects the corner",
            corner_ratio >= LIFETIME_RATIO,
            f"corner tau(eta={top:g})/tau(eta=1) = {corner_ratio:.3g} (need >= {LIFETIME_RATIO:g})"
            + _censor_note(rows, "corner_z"),
        ),
        Check(
            "bulk is not protected",
            bulk_ratio < BULK_RATIO,
            f"bulk tau ratio = {bulk_ratio:.3g} (need < {BULK_RATIO:g})",
        ),
        Check(
            "resonance dips",
            not missing,
            f"local minima at {', '.join(f'{m:g}' for m in minima) or 'none'}"
            + (f"; missing {', '.join(f'{e:g}' for e in missing)}" if missing else ""),
        ),
    ]


def _check_fig4(result: RunResult) -> list[Check]:
    checks = []
    for label in ("corner_z", "bulk_z"):
        dynamics = result.estimates[f"circuit_{label}"]
        echo = result.estimates[f"echo_{label}"]
        excess = max(
            abs(d.mean) - math.sqrt(max(e.mean, 0.0)) - 3 * (d.stderr + e.stderr)
            for d, e in zip(dynamics, echo, strict=True)
        )
        checks.append(Check(
            f"{label} stays inside the echo envelope",
            excess <= ENVELOPE_SLACK,
            f"largest excess over sqrt(echo) {excess:+.3f} (need <= {ENVELOPE_SLACK:g})",
        ))
    echo = result.estimates["echo_corner_z"]
    checks.append(Check(
        "noise shrinks the echo",
        echo[-1].mean < echo[0].mean,
        f"echo {echo[0].mean:.3f} at n=0, {echo[-1].mean:.3f} at n={len(echo) - 1}",
    ))
    return checks



CHECKS: dict[str, Callable[[RunResult], list[Check]]] = {
    "fig1b": _check_fig1b,
    "fig1c": _check_fig1c,
    "fig1d": _check_fig1d,
    "fig2ab": _check_fig2ab,
    "fig2c": _check_fig2c,
    "fig3ab": _check_fig3ab,
    "fig3c": _check_fig1d,
    "fig4": _check_fig4,
}


@dataclass(slots=True)
class Reproduction:
    figure: str
    result: RunResult
    checks: list[Check]
    summary: Path

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


async def reproduce(
    figure: str,
    *,
    out: str | None = None,
    workers: int | None = None,
    seed: int | None = None,
) -> Reproduction:
    """Run the bundled config for ``figure`` and write ``summary.txt`` next to its CSVs."""
    if figure not in CHECKS:
        raise ExperimentError(f"unknown figure {figure!r} (expected one of {', '.join(sorted(CHECKS))})")
    config = figure_config(figure).with_overrides(seed=seed, workers=workers, out=out)
    result = await run_experiment(config)
    checks = CHECKS[figure](result)
    lines = [f"{figure} ({config.fingerprint[:12]})", *(c.line() for c in checks)]
    summary = atomic_write(result.out_dir / SUMMARY, "\n".join(lines) + "\n")
    for check in checks:
        (log.info if check.passed else log.warning)("%s", check.line())
    return Reproduction(figure, result, checks, summary)
