from .figures import CHECKS, Check, Reproduction, figure_config, figures, reproduce
from .persistence import (
    MANIFEST,
    read_manifest,
    read_table,
    table_body,
    write_manifest,
    write_series,
    write_table,
)
from .pool import WorkerPool
from .run_config import (
    ConfigInvalid,
    ExperimentKind,
    RunConfig,
    from_mapping,
    load_config,
    parse_config,
)
from .runner import RunResult, compile_circuits, run, run_experiment

__all__ = [
    "CHECKS",
    "MANIFEST",
    "Check",
    "ConfigInvalid",
    "ExperimentKind",
    "Reproduction",
    "RunConfig",
    "RunResult",
    "WorkerPool",
    "compile_circuits",
    "figure_config",
    "figures",
    "from_mapping",
    "load_config",
    "parse_config",
    "read_manifest",
    "read_table",
    "reproduce",
    "run",
    "run_experiment",
    "table_body",
    "write_manifest",
    "write_series",
    "write_table",
]
