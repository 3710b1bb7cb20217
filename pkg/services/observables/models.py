from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from models.lattice import Lattice
from models.pauli import PauliString
from services.hamiltonians import corner_operators
from utils.errors import CornerDtcError

PAULI_BOUND_SLACK = 1e-9


class ObservableError(CornerDtcError):
    pass


class ObservableLabel(str, Enum):
    CORNER_Z = "corner_z"
    CORNER_X = "corner_x"
    BULK_Z = "bulk_z"
    BULK_K = "bulk_k"
    EDGE_Z = "edge_z"
    EDGE_K = "edge_k"
    ENERGY = "energy"

    @classmethod
    def parse(cls, raw: str) -> ObservableLabel:
        try:
            return cls(raw.strip().lower())
        except ValueError as exc:
            allowed = ", ".join(m.value for m in cls)
            raise ObservableError(f"unknown observable {raw!r} (expected one of {allowed})") from exc


def resolve_observable(lattice: Lattice, label: ObservableLabel | str) -> PauliString:
    """Pauli string behind a config label; ``energy`` has none."""
    label = ObservableLabel.parse(label) if isinstance(label, str) else label
    match label:
        case ObservableLabel.CORNER_Z:
            return corner_operators(lattice)[0]
        case ObservableLabel.CORNER_X:
            return corner_operators(lattice)[1]
        case ObservableLabel.BULK_Z:
            return PauliString.single(lattice.central_bulk_site(), "Z", lattice.n_sites)
        case ObservableLabel.BULK_K:
            return lattice.stabilizer_support(lattice.central_bulk_site())
        case ObservableLabel.EDGE_Z:
            return PauliString.single(lattice.first_edge_site(), "Z", lattice.n_sites)
        case ObservableLabel.EDGE_K:
            return lattice.stabilizer_support(lattice.first_edge_site())
    raise ObservableError(f"{label.value} is not a Pauli observable")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One value per drive period, n = 0 .. n_max."""

    label: str
    values: np.ndarray
    period: float
    protocol: dict[str, Any] = field(default_factory=dict)
    imag_residual: np.ndarray | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ObservableError(f"series {self.label!r} must be one-dimensional")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_max(self) -> int:
        return len(self) - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self)) * self.period

    def staggered(self) -> np.ndarray:
        """(-1)^n values[n]: the period-doubled signal brought to a slow envelope."""
        signs = np.where(np.arange(len(self)) % 2 == 0, 1.0, -1.0)
        return signs * self.values

    def within_pauli_bound(self) -> bool:
        return bool(np.all(np.abs(self.values) <= 1.0 + PAULI_BOUND_SLACK))
