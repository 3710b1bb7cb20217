from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from utils.errors import CornerDtcError


class CircuitError(CornerDtcError):
    pass


class NonAdjacentGate(CircuitError):
    pass


class SeedRequired(CircuitError):
    pass


class CircuitParseError(CircuitError):
    def __init__(self, line: int, message: str) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}")


class GateName(str, Enum):
    H = "H"
    X = "X"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CZ = "CZ"
    CX = "CX"

    @property
    def n_qubits(self) -> int:
        return 2 if self in (GateName.CZ, GateName.CX) else 1

    @property
    def is_rotation(self) -> bool:
        return self in (GateName.RX, GateName.RY, GateName.RZ)


@dataclass(frozen=True, slots=True)
class Gate:
    """R_a(theta) = exp(-i theta sigma^a / 2); CX qubits are (control, target)."""

    name: GateName
    qubits: tuple[int, ...]
    angle: float | None = None
    layer: int = 0

    def __post_init__(self) -> None:
        if len(self.qubits) != self.name.n_qubits:
            raise CircuitError(f"{self.name.value} takes {self.name.n_qubits} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.name.value} on repeated qubit {self.qubits}")
        if self.name.is_rotation != (self.angle is not None):
            raise CircuitError(f"{self.name.value}: angle is required exactly for rotations")

    def inverse(self, layer: int | None = None) -> Gate:
        angle = -self.angle if self.angle is not None else None
        return Gate(self.name, self.qubits, angle, self.layer if layer is None else layer)


@dataclass(frozen=True, slots=True)
class NoiseModel:
    """Uniform depolarizing noise, sampled as Pauli-error trajectories."""

    p1: float = 0.0
    p2: float = 0.0
    trajectories: int = 100
    seed: int | None = None

    def __post_init__(self) -> None:
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise CircuitError(f"{name}={p} outside [0, 1]")
        if self.trajectories < 1:
            raise CircuitError(f"trajectories must be >= 1, got {self.trajectories}")

    @property
    def is_ideal(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def depth(self) -> int:
        return len({g.layer for g in self.gates})

    @property
    def last_layer(self) -> int:
        return max((g.layer for g in self.gates), default=-1)

    def gate_counts(self) -> dict[str, int]:
        return dict(Counter(g.name.value for g in self.gates))

    def two_qubit_gates(self) -> tuple[Gate, ...]:
        return tuple(g for g in self.gates if g.name.n_qubits == 2)

    def _check_width(self, other: Circuit) -> None:
        if other.n_qubits != self.n_qubits:
            raise CircuitError(f"cannot join {self.n_qubits}- and {other.n_qubits}-qubit circuits")

    def __add__(self, other: Circuit) -> Circuit:
        """``self`` first, then ``other``, with ``other``'s layers shifted past ours."""
        self._check_width(other)
        offset = self.last_layer + 1 - min((g.layer for g in other.gates), default=0)
        shifted = tuple(
            Gate(g.name, g.qubits, g.angle, g.layer + offset) for g in other.gates
        )
        return Circuit(self.n_qubits, self.gates + shifted)

    def repeat(self, times: int) -> Circuit:
        out = Circuit(self.n_qubits)
        for _ in range(times):
            out = out + self
        return out

    def inverse(self) -> Circuit:
        top = self.last_layer
        return Circuit(
            self.n_qubits,
            tuple(g.inverse(layer=top - g.layer) for g in reversed(self.gates)),
        )
