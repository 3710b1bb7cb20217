from .eigensolver import finite_size_gap, ground_state, sector_ground_state
from .floquet import (
    FloquetPropagator,
    PulseSchedule,
    corner_beat_gap,
    floquet_step,
    half_period_pulse,
    select_corner_polarized,
)
from .krylov import DEFAULT_TOL, krylov_evolve
from .models import EngineError, NoConvergence, SolverStats

__all__ = [
    "DEFAULT_TOL",
    "EngineError",
    "FloquetPropagator",
    "NoConvergence",
    "PulseSchedule",
    "SolverStats",
    "corner_beat_gap",
    "finite_size_gap",
    "floquet_step",
    "ground_state",
    "half_period_pulse",
    "krylov_evolve",
    "sector_ground_state",
    "select_corner_polarized",
]
