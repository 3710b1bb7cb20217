"""Line-based circuit export.

    qubits 12
    # layer 0
    RX 1 3.2986722862692828
    # layer 1
    CZ 3 7

Qubits are 1-based in the text and 0-based in memory. Angles use ``repr`` so
an import reproduces the exported floats exactly.
"""
from __future__ import annotations

from services.circuits.models import Circuit, CircuitError, CircuitParseError, Gate, GateName

_HEADER = "qubits"
_LAYER = "# layer"


def to_text(circuit: Circuit) -> str:
    lines = [f"{_HEADER} {circuit.n_qubits}"]
    current: int | None = None
    for gate in circuit.gates:
        if gate.layer != current:
            current = gate.layer
            lines.append(f"{_LAYER} {current}")
        fields = [gate.name.value, *(str(q + 1) for q in gate.qubits)]
        if gate.angle is not None:
            fields.append(repr(gate.angle))
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def _parse_gate(lineno: int, fields: list[str], layer: int, n_qubits: int) -> Gate:
    try:
        name = GateName(fields[0].upper())
    except ValueError:
        raise CircuitParseError(lineno, f"unknown gate {fields[0]!r}") from None
    expected = 1 + name.n_qubits + (1 if name.is_rotation else 0)
    if len(fields) != expected:
        raise CircuitParseError(
            lineno, f"{name.value} takes {expected - 1} argument(s), got {len(fields) - 1}"
        )
    try:
        qubits = tuple(int(f) - 1 for f in fields[1 : 1 + name.n_qubits])
        angle = float(fields[-1]) if name.is_rotation else None
    except ValueError as exc:
        raise CircuitParseError(lineno, str(exc)) from None
    if any(not 0 <= q < n_qubits for q in qubits):
        raise CircuitParseError(lineno, f"qubit outside 1..{n_qubits}")
    try:
        return Gate(name, qubits, angle, layer)
    except CircuitError as exc:
        raise CircuitParseError(lineno, str(exc)) from None


def from_text(text: str) -> Circuit:
    """Inverse of :func:`to_text`. Blank lines and other ``#`` comments are skipped.

    Adjacency is not checked here: the text carries no lattice.
    """
    n_qubits: int | None = None
    layer = 0
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(_LAYER):
            try:
                layer = int(line[len(_LAYER) :])
            except ValueError:
                raise CircuitParseError(lineno, f"bad layer marker {line!r}") from None
            continue
        if line.startswith("#"):
            continue
        fields = line.split()
        if n_qubits is None:
            if fields[0] != _HEADER or len(fields) != 2 or not fields[1].isdigit():
                raise CircuitParseError(lineno, f"expected '{_HEADER} <n>' header, got {line!r}")
            n_qubits = int(fields[1])
            continue
        gates.append(_parse_gate(lineno, fields, layer, n_qubits))
    if n_qubits is None:
        raise CircuitParseError(1, "missing qubits header")
    return Circuit(n_qubits, tuple(gates))
