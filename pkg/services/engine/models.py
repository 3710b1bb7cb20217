from __future__ import annotations

from dataclasses import asdict, dataclass

from utils.errors import CornerDtcError


class EngineError(CornerDtcError):
    pass


class NoConvergence(EngineError):
    def __init__(self, iterations: int, residual: float, what: str = "solver") -> None:
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"{what} did not converge after {iterations} iterations (residual {residual:.3e})")


@dataclass(slots=True)
class SolverStats:
    """Work counters reported in the run manifest."""

    matvecs: int = 0
    krylov_substeps: int = 0
    krylov_halvings: int = 0
    eigensolver_restarts: int = 0
    max_norm_drift: float = 0.0

    def merge(self, other: SolverStats) -> None:
        self.matvecs += other.matvecs
        self.krylov_substeps += other.krylov_substeps
        self.krylov_halvings += other.krylov_halvings
        self.eigensolver_restarts += other.eigensolver_restarts
        self.max_norm_drift = max(self.max_norm_drift, other.max_norm_drift)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)
