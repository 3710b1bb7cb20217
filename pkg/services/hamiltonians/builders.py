from __future__ import annotations

import logging
import math
from typing import NamedTuple

from models.lattice import Color, Lattice
from models.pauli import OperatorSum, PauliString, Term
from models.protocol import FloquetProtocol

log = logging.getLogger("hamiltonians")


class DrivePair(NamedTuple):
    h1: OperatorSum
    h2: OperatorSum


def _j(lattice: Lattice, protocol: FloquetProtocol, i: int) -> float:
    return protocol.j_for(lattice.color(i) is Color.RED)


def _stabilizers(lattice: Lattice, coeff_of) -> list[Term]:
    return [(coeff_of(i), lattice.stabilizer_support(i)) for i in lattice.non_corner_sites]


def _plaquettes(lattice: Lattice, coeff_of) -> list[Term]:
    return [(coeff_of(i), lattice.plaquette_support(i)) for i in lattice.non_corner_sites]


def _field(lattice: Lattice, strength: float, letter: str, sites) -> list[Term]:
    n = lattice.n_sites
    return [(strength, PauliString.single(i, letter, n)) for i in sites]


def _xx_bonds(lattice: Lattice, strength: float) -> list[Term]:
    n = lattice.n_sites
    return [
        (strength, PauliString.from_sites({i: "X", j: "X"}, n)) for i, j in lattice.edges
    ]


def build_drive(lattice: Lattice, protocol: FloquetProtocol) -> DrivePair:
    """Both halves of the period, as written for H(t) (no factor of two)."""
    n = lattice.n_sites
    every = range(n)
    h1 = OperatorSum(n, tuple(_field(lattice, math.pi / protocol.period + protocol.epsilon, "X", every)))

    terms = _stabilizers(lattice, lambda i: _j(lattice, protocol, i))
    if protocol.include_corner_k1 and lattice.blue_corners:
        terms.append((protocol.j_b, lattice.stabilizer_support(lattice.blue_corners[0])))
    terms += _field(lattice, protocol.h_x, "X", every)
    terms += _field(lattice, protocol.h_y, "Y", lattice.red_sites)
    terms += _field(lattice, protocol.h_z, "Z", lattice.red_sites)
    terms += _xx_bonds(lattice, protocol.v_xx)
    terms += _plaquettes(lattice, lambda i: protocol.v_zz)
    h2 = OperatorSum(n, tuple(terms))
    log.debug("Drive built: |H1|=%d terms, |H2|=%d terms", len(h1), len(h2))
    return DrivePair(h1, h2)


def build_heff(lattice: Lattice, protocol: FloquetProtocol) -> OperatorSum:
    """2 H_eff at leading order; h_y, h_z and the corner K average out under the flip."""
    terms = _stabilizers(lattice, lambda i: _j(lattice, protocol, i))
    terms += _plaquettes(lattice, lambda i: protocol.v_zz)
    terms += _xx_bonds(lattice, protocol.v_xx)
    terms += _field(lattice, protocol.h_x + protocol.epsilon, "X", range(lattice.n_sites))
    return OperatorSum(lattice.n_sites, tuple(terms))


def build_dual(lattice: Lattice, protocol: FloquetProtocol) -> OperatorSum:
    """2 H_dual: stabilizer and plaquette roles exchanged, same index sets as build_heff."""
    terms = _plaquettes(lattice, lambda i: _j(lattice, protocol, i))
    terms += _stabilizers(lattice, lambda i: protocol.v_zz)
    terms += _xx_bonds(lattice, protocol.v_xx)
    terms += _field(lattice, protocol.h_x + protocol.epsilon, "X", range(lattice.n_sites))
    return OperatorSum(lattice.n_sites, tuple(terms))


def effective_generator(lattice: Lattice, protocol: FloquetProtocol) -> OperatorSum:
    """H_eff itself (half of build_heff), the generator of the prethermal evolution."""
    return build_heff(lattice, protocol).scaled(0.5)
