from .export_circuit import ExportCircuitHandler
from .reproduce import ReproduceHandler
from .run import RunHandler
from .validate_config import ValidateConfigHandler

__all__ = [
    "ExportCircuitHandler",
    "ReproduceHandler",
    "RunHandler",
    "ValidateConfigHandler",
]
