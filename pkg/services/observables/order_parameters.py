from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import astuple, dataclass

import numpy as np

from models.lattice import Lattice
from models.pauli import OperatorSum, PauliString, multiply
from services.engine import SolverStats, sector_ground_state

log = logging.getLogger("observables")


@dataclass(frozen=True, slots=True)
class OrderParameters:
    o_m: float
    zz: float
    xx: float

    def __iter__(self) -> Iterator[float]:
        return iter(astuple(self))


def membrane_operator(lattice: Lattice) -> PauliString:
    """Product of the red non-corner stabilizers."""
    membrane = PauliString.identity(lattice.n_sites)
    for i in lattice.red_sites:
        if i in lattice.non_corner_sites:
            membrane = multiply(membrane, lattice.stabilizer_support(i))
    return membrane


def _expect(string: PauliString, state: np.ndarray) -> float:
    return OperatorSum(string.n_sites, ((1.0, string),)).expectation(state)


def order_parameters(
    lattice: Lattice,
    h: OperatorSum,
    *,
    seed: int = 0,
    stats: SolverStats | None = None,
) -> OrderParameters:
    """<O_m>, <Z Z> and <X X> in the lowest state of the (G_b = +1, G_r = +1) sector."""
    g_r, g_b = lattice.symmetry_generators()
    _, vectors = sector_ground_state(h, (g_b, g_r), 1, seed=seed, stats=stats)
    state = vectors[:, 0]
    c1, c2 = lattice.correlator_pair()
    n = lattice.n_sites
    result = OrderParameters(
        o_m=_expect(membrane_operator(lattice), state),
        zz=_expect(PauliString.from_sites({c1: "Z", c2: "Z"}, n), state),
        xx=_expect(PauliString.from_sites({c1: "X", c2: "X"}, n), state),
    )
    log.debug("Order parameters at sites (%d, %d): %s", c1, c2, result)
    return result
