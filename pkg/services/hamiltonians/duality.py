from __future__ import annotations

import logging
from functools import lru_cache

from models.lattice import Color, Lattice
from models.pauli import DimensionMismatch, OperatorSum, PauliString, Phase, Term, multiply

log = logging.getLogger("hamiltonians")


def _sign(offset: float) -> int:
    return 1 if offset > 0 else -1


@lru_cache(maxsize=32)
def _z_images(lattice: Lattice) -> tuple[PauliString, ...]:
    """Image of sigma^z_i for every site: Z_i times X on a quadrant of the other color."""
    sx = _sign(lattice.red_offset[0])
    sy = _sign(lattice.red_offset[1])
    n = lattice.n_sites
    images: list[PauliString] = []
    for site in lattice.sites:
        # blue sites look toward +offset, red sites toward -offset
        direction = 1 if site.color is Color.BLUE else -1
        other = Color.RED if site.color is Color.BLUE else Color.BLUE
        x_mask = 0
        for j in lattice.sites_of(other):
            t = lattice.sites[j]
            if direction * sx * (t.x2 - site.x2) > 0 and direction * sy * (t.y2 - site.y2) > 0:
                x_mask |= 1 << j
        images.append(PauliString(n, x_mask, 1 << site.index))
    return tuple(images)


def dualize(lattice: Lattice, s: PauliString) -> PauliString:
    """Apply the Kramers-Wannier-type map that exchanges K_i and P_i.

    sigma^x is fixed. ``s`` is factorized as ``phase (-i)^{#Y} (prod Z)(prod X)``
    with the Z factors in ascending site order, and the map is applied factor by
    factor. The map is an involution and an algebra automorphism.
    """
    if s.n_sites != lattice.n_sites:
        raise DimensionMismatch(f"{s.n_sites}-site string on a {lattice.n_sites}-site lattice")
    images = _z_images(lattice)
    out = PauliString.identity(lattice.n_sites)
    for site in range(lattice.n_sites):
        if s.z_mask >> site & 1:
            out = multiply(out, images[site])
    out = multiply(out, PauliString(lattice.n_sites, s.x_mask, 0))
    return out.with_phase(Phase.quarter_turns(out.phase + s.phase - s.n_y))


def dualize_operator(lattice: Lattice, op: OperatorSum) -> OperatorSum:
    terms: list[Term] = [(c, dualize(lattice, s)) for c, s in op.terms]
    return OperatorSum(op.n_sites, tuple(terms))
