from __future__ import annotations

import logging
import math

import numpy as np

from services.analysis.models import (
    DEFAULT_THRESHOLD,
    DEFAULT_WINDOW,
    AnalysisError,
    EmptySeries,
    Lifetime,
)
from services.observables import TimeSeries

log = logging.getLogger("analysis")

CROSSING_SLACK = 1e-9


def centered_moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Mean over ``window`` consecutive points centred on each n, truncated at the ends."""
    if window < 1:
        raise AnalysisError(f"window must be >= 1, got {window}")
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    start = np.arange(n) - window // 2
    lo = np.clip(start, 0, n)
    hi = np.clip(start + window, 0, n)
    csum = np.concatenate(([0.0], np.cumsum(values)))
    return (csum[hi] - csum[lo]) / (hi - lo)


def lifetime(
    series: TimeSeries,
    threshold: float = DEFAULT_THRESHOLD,
    window: int = DEFAULT_WINDOW,
) -> Lifetime:
    """First period where the smoothed period-doubled envelope drops to ``threshold``.

    Never crossing gives ``censored=True`` with tau = T n_max.
    """
    if len(series) == 0:
        raise EmptySeries(f"series {series.label!r} is empty")
    if not 0.0 < threshold < 1.0:
        raise AnalysisError(f"threshold must lie in (0, 1), got {threshold}")
    envelope = np.abs(centered_moving_average(series.staggered(), window))
    below = np.nonzero(envelope <= threshold * (1.0 + CROSSING_SLACK))[0]
    if below.size == 0:
        log.debug("Series %s never crossed %.3f: censored", series.label, threshold)
        return Lifetime(tau=series.period * series.n_max, censored=True)
    n = int(below[0])
    return Lifetime(tau=series.period * n, censored=False, crossing=n)


def beat_frequency(series: TimeSeries) -> float | None:
    """Angular frequency of the envelope, read off its first zero crossing.

    For S(n) = cos(w n T) the first zero sits at t = pi / (2 w).
    """
    if len(series) == 0:
        raise EmptySeries(f"series {series.label!r} is empty")
    s = series.staggered()
    sign_change = np.nonzero(np.signbit(s[1:]) != np.signbit(s[:-1]))[0]
    if sign_change.size == 0:
        return None
    i = int(sign_change[0])
    t = (i + s[i] / (s[i] - s[i + 1])) * series.period
    return math.pi / (2.0 * t)


def find_local_minima(xs: np.ndarray, ys: np.ndarray) -> list[float]:
    """Interior grid points lower than the left neighbour and not higher than the right one."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape:
        raise AnalysisError(f"x grid has {xs.size} points, y has {ys.size}")
    return [
        float(xs[i])
        for i in range(1, xs.size - 1)
        if ys[i] < ys[i - 1] and ys[i] <= ys[i + 1]
    ]


def locate_crossings(xs: np.ndarray, ya: np.ndarray, yb: np.ndarray) -> list[float]:
    """Linearly interpolated x where ya - yb changes sign (exact zeros count once)."""
    xs = np.asarray(xs, dtype=np.float64)
    diff = np.asarray(ya, dtype=np.float64) - np.asarray(yb, dtype=np.float64)
    if xs.shape != diff.shape:
        raise AnalysisError("crossing curves must share the x grid")
    out: list[float] = []
    for i in range(xs.size - 1):
        d0, d1 = diff[i], diff[i + 1]
        if d0 == 0.0:
            out.append(float(xs[i]))
        elif d0 * d1 < 0:
            out.append(float(xs[i] + (xs[i + 1] - xs[i]) * d0 / (d0 - d1)))
    if xs.size and diff[-1] == 0.0:
        out.append(float(xs[-1]))
    return out
