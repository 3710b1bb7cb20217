"""Nearest-neighbour gate sequences for the drive.

Two-qubit gates only ever join lattice neighbours. Blocks of CZ or CX gates are
laid out one diagonal direction per layer, so the stabilizer step has the same
depth on every lattice with the same local degree.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from enum import Enum

from models.lattice import Color, Lattice, UnsupportedGeometry
from models.protocol import FloquetProtocol
from services.circuits.models import Circuit, CircuitError, Gate, GateName, NonAdjacentGate

log = logging.getLogger("circuits")

_DIRECTIONS = ((1, 1), (-1, 1), (1, -1), (-1, -1))
PERTURBATION_PARTS = ("single", "xx", "zz")


class PulseConvention(str, Enum):
    DRIVE = "drive"  # R_x(pi + eps T), what integrating the first half period gives
    REVERSED = "reversed"  # R_x(pi - eps T), imperfection with the opposite sign


class CircuitBuilder:
    """Collects gates layer by layer and refuses non-adjacent two-qubit gates."""

    def __init__(self, lattice: Lattice) -> None:
        self.lattice = lattice
        self._gates: list[Gate] = []
        self._layer = 0
        self._dirty = False

    def _close_layer(self) -> None:
        if self._dirty:
            self._layer += 1
            self._dirty = False

    def _add(self, name: GateName, qubits: tuple[int, ...], angle: float | None = None) -> None:
        if name.n_qubits == 2:
            a, b = qubits
            if b not in self.lattice.neighbors[a]:
                raise NonAdjacentGate(f"{name.value} on non-adjacent sites {a + 1} and {b + 1}")
        self._gates.append(Gate(name, qubits, angle, self._layer))
        self._dirty = True

    def single_layer(self, name: GateName, sites: Iterable[int], angle: float | None = None) -> None:
        """One gate per site, all in one layer; zero-angle rotations are skipped."""
        self._close_layer()
        if name.is_rotation and angle == 0.0:
            return
        for site in sites:
            self._add(name, (site,), angle)
        self._close_layer()

    def rotation(self, name: GateName, site: int, angle: float) -> None:
        self._close_layer()
        self._add(name, (site,), angle)
        self._close_layer()

    def two_qubit(self, name: GateName, pairs: Iterable[tuple[int, int]]) -> None:
        """Gates on ``pairs`` in up to four layers, one per diagonal direction."""
        by_direction: dict[tuple[int, int], list[tuple[int, int]]] = {d: [] for d in _DIRECTIONS}
        for a, b in pairs:
            sa, sb = self.lattice.sites[a], self.lattice.sites[b]
            by_direction.setdefault(
                (1 if sb.x2 > sa.x2 else -1, 1 if sb.y2 > sa.y2 else -1), []
            ).append((a, b))
        for group in by_direction.values():
            self._close_layer()
            for pair in sorted(group):
                self._add(name, pair)
            self._close_layer()

    def build(self) -> Circuit:
        return Circuit(self.lattice.n_sites, tuple(self._gates))


def _blue_to_red(lattice: Lattice, edges: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Orient each edge as (blue, red)."""
    return [(i, j) if lattice.color(i) is Color.BLUE else (j, i) for i, j in edges]


def compile_u1(
    lattice: Lattice,
    protocol: FloquetProtocol,
    convention: PulseConvention | str = PulseConvention.DRIVE,
) -> Circuit:
    """The imperfect pi pulse: one R_x per site."""
    convention = PulseConvention(convention)
    sign = 1.0 if convention is PulseConvention.DRIVE else -1.0
    angle = math.pi + sign * protocol.epsilon * protocol.period
    builder = CircuitBuilder(lattice)
    builder.single_layer(GateName.RX, range(lattice.n_sites), angle)
    return builder.build()


def _stabilizer_sites(lattice: Lattice, protocol: FloquetProtocol) -> list[int]:
    sites = list(lattice.non_corner_sites)
    if protocol.include_corner_k1 and lattice.blue_corners:
        sites.append(lattice.blue_corners[0])
    return sorted(sites)


def compile_u2(lattice: Lattice, protocol: FloquetProtocol, dt: float) -> Circuit:
    """exp(-i dt sum J_c K_i), exact: each K_i is CZ-conjugated R_x.

    Blue stabilizers then red ones; the CZ layers between the two groups
    cancel except on edges touched by only one group.
    """
    if dt <= 0:
        raise CircuitError(f"dt must be > 0, got {dt}")
    sites = _stabilizer_sites(lattice, protocol)
    blue = [i for i in sites if lattice.color(i) is Color.BLUE]
    red = [i for i in sites if lattice.color(i) is Color.RED]

    def fan(centers: list[int]) -> set[tuple[int, int]]:
        return {tuple(sorted((c, j))) for c in centers for j in lattice.neighbors[c]}  # type: ignore[misc]

    blue_edges, red_edges = fan(blue), fan(red)
    middle = blue_edges ^ red_edges
    builder = CircuitBuilder(lattice)
    builder.two_qubit(GateName.CZ, _blue_to_red(lattice, sorted(blue_edges)))
    builder.single_layer(GateName.RX, blue, 2.0 * protocol.j_b * dt)
    builder.two_qubit(GateName.CZ, _blue_to_red(lattice, sorted(middle)))
    builder.single_layer(GateName.RX, red, 2.0 * protocol.j_r * dt)
    builder.two_qubit(GateName.CZ, _blue_to_red(lattice, sorted(red_edges)))
    return builder.build()


def _plaquette_block(builder: CircuitBuilder, center: int, angle: float) -> None:
    """exp(-i angle/2 prod_{j ~ center} Z_j) from neighbour CX gates only.

    Swap the centre with its first neighbour, gather the parity of the other
    neighbours onto the centre qubit, rotate, then undo.
    """
    first, *rest = builder.lattice.neighbors[center]
    swap = ((center, first), (first, center), (center, first))
    for control, target in swap:
        builder.two_qubit(GateName.CX, [(control, target)])
    for j in rest:
        builder.two_qubit(GateName.CX, [(j, center)])
    builder.rotation(GateName.RZ, center, angle)
    for j in reversed(rest):
        builder.two_qubit(GateName.CX, [(j, center)])
    for control, target in reversed(swap):
        builder.two_qubit(GateName.CX, [(control, target)])


def compile_perturbations(
    lattice: Lattice,
    protocol: FloquetProtocol,
    dt: float,
    parts: Iterable[str] = PERTURBATION_PARTS,
) -> Circuit:
    """First-order product of the perturbation exponentials over a time ``dt``.

    ``single``: R_x on every site, R_y and R_z on red sites. ``xx``: one
    CX-R_x-CX block per bond. ``zz``: one plaquette block per non-corner site.
    """
    if dt <= 0:
        raise CircuitError(f"dt must be > 0, got {dt}")
    wanted = set(parts)
    unknown = wanted - set(PERTURBATION_PARTS)
    if unknown:
        raise CircuitError(f"unknown perturbation parts {sorted(unknown)}")
    builder = CircuitBuilder(lattice)
    if "single" in wanted:
        builder.single_layer(GateName.RX, range(lattice.n_sites), 2.0 * protocol.h_x * dt)
        builder.single_layer(GateName.RY, lattice.red_sites, 2.0 * protocol.h_y * dt)
        builder.single_layer(GateName.RZ, lattice.red_sites, 2.0 * protocol.h_z * dt)
    if "xx" in wanted and protocol.v_xx:
        bonds = _blue_to_red(lattice, lattice.edges)
        for direction in _DIRECTIONS:
            group = [
                (b, r) for b, r in bonds
                if (lattice.sites[r].x2 > lattice.sites[b].x2) == (direction[0] > 0)
                and (lattice.sites[r].y2 > lattice.sites[b].y2) == (direction[1] > 0)
            ]
            if not group:
                continue
            builder.two_qubit(GateName.CX, group)
            builder.single_layer(GateName.RX, [b for b, _ in group], 2.0 * protocol.v_xx * dt)
            builder.two_qubit(GateName.CX, group)
    if "zz" in wanted and protocol.v_zz:
        for center in lattice.non_corner_sites:
            _plaquette_block(builder, center, 2.0 * protocol.v_zz * dt)
    return builder.build()


def compile_ugs(lattice: Lattice) -> Circuit:
    """Prepare a stabilizer ground state from |0...0>: every non-corner K_i = -1, corners in |0>.

    X then H turns each non-corner qubit into |->; CZ fans around the red
    non-corner sites then attach the Z strings of every stabilizer.
    """
    if not lattice.corners:
        raise UnsupportedGeometry("ground-state preparation needs at least one corner")
    bulk = lattice.non_corner_sites
    builder = CircuitBuilder(lattice)
    builder.single_layer(GateName.X, bulk)
    builder.single_layer(GateName.H, bulk)
    red_fans = sorted(
        {(k, j) for j in bulk if lattice.color(j) is Color.RED for k in lattice.neighbors[j]}
    )
    builder.two_qubit(GateName.CZ, red_fans)
    return builder.build()


def compile_floquet_period(
    lattice: Lattice,
    protocol: FloquetProtocol,
    substeps: int = 1,
    convention: PulseConvention | str = PulseConvention.DRIVE,
    parts: Iterable[str] = PERTURBATION_PARTS,
) -> Circuit:
    """U_1, then ``substeps`` rounds of U_2(dt) and the perturbations, dt = T / (2 substeps)."""
    if substeps < 1:
        raise CircuitError(f"substeps must be >= 1, got {substeps}")
    dt = protocol.period / (2 * substeps)
    parts = tuple(parts)
    step = compile_u2(lattice, protocol, dt)
    if parts:
        step = step + compile_perturbations(lattice, protocol, dt, parts)
    circuit = compile_u1(lattice, protocol, convention) + step.repeat(substeps)
    log.debug(
        "Floquet period on %d qubits: %d gates, depth %d (%s)",
        circuit.n_qubits, len(circuit), circuit.depth, circuit.gate_counts(),
    )
    return circuit


def echo_circuit(prep: Circuit, period: Circuit, n_periods: int) -> Circuit:
    """prep, n periods forward, n periods backward, prep undone: the identity without noise."""
    forward = prep + period.repeat(n_periods)
    return forward + forward.inverse()
