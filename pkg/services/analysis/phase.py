from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from services.analysis.lifetime import locate_crossings
from services.analysis.models import AnalysisError, DualityRow, GridMismatch, PhaseRow

log = logging.getLogger("analysis")

RECIPROCAL_TOL = 1e-9

Samples = Sequence[tuple[float, float]]
SampleList = list[tuple[float, float]]


def phase_boundary(rows: Sequence[PhaseRow]) -> float | None:
    """Trivial-phase onset along a V_xx line: where |xx| first exceeds max(|O_m|, |zz|).

    Linearly interpolated between the last point below and the first above.
    """
    if not rows:
        raise AnalysisError("empty phase scan")
    xs = np.array([r.key for r in rows])
    margin = np.array([abs(r.xx) - max(abs(r.o_m), abs(r.zz)) for r in rows])
    above = np.nonzero(margin > 0)[0]
    if above.size == 0:
        return None
    i = int(above[0])
    if i == 0:
        return float(xs[0])
    crossings = locate_crossings(xs[i - 1 : i + 1], margin[i - 1 : i + 1], np.zeros(2))
    return crossings[0] if crossings else float(xs[i])


def _paired(f1_samples: Samples, f2_samples: Samples) -> list[tuple[float, float, float]]:
    """(v, f1(v), f2(1/v)) for every f1 sample; f2's grid must be the reciprocal grid."""
    if len(f1_samples) != len(f2_samples):
        raise GridMismatch(f"{len(f1_samples)} f1 samples vs {len(f2_samples)} f2 samples")
    out: list[tuple[float, float, float]] = []
    for v, f1 in f1_samples:
        if v == 0:
            raise GridMismatch("f1 grid contains 0, which has no reciprocal")
        target = 1.0 / v
        match = [f2 for u, f2 in f2_samples if abs(u - target) <= RECIPROCAL_TOL * max(1.0, abs(target))]
        if not match:
            raise GridMismatch(f"no f2 sample at 1/{v:g} = {target:g}")
        out.append((v, f1, match[0]))
    return out


def duality_relation_check(f1_samples: Samples, f2_samples: Samples) -> float:
    """max |f1(v)/v - f2(1/v)|: zero when the boundaries are self-dual."""
    pairs = _paired(f1_samples, f2_samples)
    if not pairs:
        raise GridMismatch("no samples to compare")
    violation = max(abs(f1 / v - f2) for v, f1, f2 in pairs)
    log.debug("Duality relation over %d points: max violation %.3e", len(pairs), violation)
    return violation


def point_a_estimate(f1_samples: Samples, f2_samples: Samples) -> tuple[float, float]:
    """Two one-sided estimates of the trivial onset on the V_zz = 0 axis.

    f1 at its smallest sampled |V_zz|, and f2(u)/u at its largest u; by the
    duality both tend to the same point.
    """
    if not f1_samples or not f2_samples:
        raise AnalysisError("point A needs samples of both boundaries")
    v_small, f1_small = min(f1_samples, key=lambda s: abs(s[0]))
    u_large, f2_large = max(f2_samples, key=lambda s: abs(s[0]))
    if u_large == 0:
        raise AnalysisError("f2 samples are all at 0")
    log.debug(
        "Point A: f1(%.3g)=%.4f, f2(%.3g)/%.3g=%.4f", v_small, f1_small, u_large, u_large, f2_large / u_large
    )
    return f1_small, f2_large / u_large


def size_crossings(rows: Sequence[PhaseRow], field: str) -> list[float]:
    """Where |field| on the smallest lattice crosses |field| on the largest one."""
    by_size: dict[int, dict[float, float]] = {}
    for r in rows:
        by_size.setdefault(r.n_sites, {})[r.key] = abs(getattr(r, field))
    if len(by_size) < 2:
        raise GridMismatch(f"size crossings need two lattice sizes, got {sorted(by_size)}")
    small, large = by_size[min(by_size)], by_size[max(by_size)]
    if sorted(small) != sorted(large):
        raise GridMismatch("lattice sizes were scanned on different grids")
    xs = np.array(sorted(small))
    return locate_crossings(xs, np.array([small[x] for x in xs]), np.array([large[x] for x in xs]))


def duality_boundaries(points: Sequence[float], rows: Sequence[PhaseRow]) -> list[DualityRow]:
    """Split rows laid out as by ``duality_jobs`` into one (v, f1(v), f2(1/v)) row per point."""
    lines = 2 * len(points)
    if not lines or len(rows) % lines:
        raise GridMismatch(f"{len(rows)} rows do not split into {lines} V_xx lines")
    width = len(rows) // lines
    out: list[DualityRow] = []
    for k, v in enumerate(points):
        f1 = phase_boundary(rows[2 * k * width : (2 * k + 1) * width])
        f2 = phase_boundary(rows[(2 * k + 1) * width : (2 * k + 2) * width])
        out.append(DualityRow(v=float(v), f1=f1, f2=f2))
        log.debug("Duality point v=%.4g: f1=%s f2(1/v)=%s", v, f1, f2)
    return out


def duality_samples(boundaries: Sequence[DualityRow]) -> tuple[SampleList, SampleList]:
    """(f1 samples, f2 samples) for ``duality_relation_check``; points missing a boundary are dropped."""
    f1: SampleList = []
    f2: SampleList = []
    for b in boundaries:
        if b.f1 is None or b.f2 is None:
            continue
        f1.append((b.v, b.f1))
        f2.append((1.0 / b.v, b.f2))
    return f1, f2
