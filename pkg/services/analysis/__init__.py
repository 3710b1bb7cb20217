from .lifetime import (
    beat_frequency,
    centered_moving_average,
    find_local_minima,
    lifetime,
    locate_crossings,
)
from .models import (
    DEFAULT_THRESHOLD,
    DEFAULT_WINDOW,
    AnalysisError,
    DualityRow,
    EmptySeries,
    GapRow,
    GridMismatch,
    LatticeSpec,
    Lifetime,
    LifetimeJob,
    LifetimeRow,
    PhaseJob,
    PhaseRow,
)
from .phase import (
    duality_boundaries,
    duality_relation_check,
    duality_samples,
    phase_boundary,
    point_a_estimate,
    size_crossings,
)
from .sweeps import (
    dimerization_jobs,
    dimerization_sweep,
    duality_jobs,
    frequency_jobs,
    frequency_sweep,
    gap_table,
    phase_jobs,
    phase_scan,
    prepare_initial,
    run_lifetime_job,
    run_phase_job,
    serial_map,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "DEFAULT_WINDOW",
    "AnalysisError",
    "DualityRow",
    "EmptySeries",
    "GapRow",
    "GridMismatch",
    "LatticeSpec",
    "Lifetime",
    "LifetimeJob",
    "LifetimeRow",
    "PhaseJob",
    "PhaseRow",
    "beat_frequency",
    "centered_moving_average",
    "dimerization_jobs",
    "dimerization_sweep",
    "duality_boundaries",
    "duality_jobs",
    "duality_relation_check",
    "duality_samples",
    "find_local_minima",
    "frequency_jobs",
    "frequency_sweep",
    "gap_table",
    "lifetime",
    "locate_crossings",
    "phase_boundary",
    "phase_jobs",
    "phase_scan",
    "point_a_estimate",
    "prepare_initial",
    "run_lifetime_job",
    "run_phase_job",
    "serial_map",
    "size_crossings",
]
