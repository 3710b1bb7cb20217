from __future__ import annotations

import logging
from collections.abc import Iterable

from models.lattice import Lattice
from models.pauli import OperatorSum, PauliString, Phase, Term, commutator, multiply
from models.protocol import FloquetProtocol, ModelError
from services.hamiltonians.builders import build_heff
from services.hamiltonians.duality import dualize

log = logging.getLogger("hamiltonians")

RESONANCES = (1.0, 3.0)
RESONANCE_WINDOW = 1e-6


class NoCornerPresent(ModelError):
    pass


class ResonantEta(ModelError):
    pass


def corner_operators(lattice: Lattice) -> tuple[PauliString, PauliString]:
    """(Z~, X~) at the first blue corner: sigma^z there and the corner stabilizer."""
    if not lattice.blue_corners:
        raise NoCornerPresent(
            f"lattice blue={lattice.blue_dims} red={lattice.red_dims} has no blue corner"
        )
    corner = lattice.blue_corners[0]
    z_tilde = PauliString.single(corner, "Z", lattice.n_sites)
    x_tilde = lattice.stabilizer_support(corner)
    return z_tilde, x_tilde


def dual_corner_operators(lattice: Lattice) -> tuple[PauliString, PauliString]:
    z_tilde, x_tilde = corner_operators(lattice)
    return dualize(lattice, z_tilde), dualize(lattice, x_tilde)


def resonance_factor(eta: float) -> float:
    """eta^3 / ((eta^2 - 1)(eta^2 - 9)): the weight of the XX-induced dressing."""
    for pole in RESONANCES:
        if abs(abs(eta) - pole) < RESONANCE_WINDOW:
            raise ResonantEta(f"eta={eta} sits on the resonance at {pole:g}")
    eta2 = eta * eta
    return eta**3 / ((eta2 - 1.0) * (eta2 - 9.0))


def _hermitian(prefactor: Phase, weighted: Iterable[tuple[float, PauliString]]) -> OperatorSum:
    """Fold ``prefactor * sum c P`` into real coefficients; every product must be Hermitian."""
    terms: list[Term] = []
    n_sites = 0
    for coeff, string in weighted:
        n_sites = string.n_sites
        phase = Phase.quarter_turns(prefactor + string.phase)
        if phase not in (Phase.ONE, Phase.MINUS_ONE):
            raise ModelError(f"dressing term {string} is not Hermitian after the prefactor")
        sign = 1.0 if phase is Phase.ONE else -1.0
        terms.append((sign * coeff, string.with_phase(Phase.ONE)))
    return OperatorSum(n_sites, tuple(terms))


def lambda_x(lattice: Lattice) -> OperatorSum:
    """X1 Z2 Z3 Z4 X5 on the corner labels: cancels the first-order field kick on Z~."""
    site = lattice.corner_labels()
    string = PauliString.from_sites(
        {site[1]: "X", site[2]: "Z", site[3]: "Z", site[4]: "Z", site[5]: "X"},
        lattice.n_sites,
    )
    return OperatorSum(lattice.n_sites, ((1.0, string),))


def lambda_xx(lattice: Lattice, eta: float) -> OperatorSum:
    """-i (Y1 X5) times the inverse local energy denominator, expanded in K2..K5.

    The bracket is J_b (eta K5 + K2 + K3 + K4)^{-1} rescaled by the resonance
    factor, written as a polynomial in the commuting stabilizers.
    """
    site = lattice.corner_labels()
    k2, k3, k4, k5 = (lattice.stabilizer_support(site[i]) for i in (2, 3, 4, 5))
    inv = 1.0 / eta
    polynomial: list[tuple[float, PauliString]] = [
        (1.0 - 7.0 * inv**2, k5),
        (2.0 * inv**2, k5 @ k2 @ k3),
        (2.0 * inv**2, k5 @ k2 @ k4),
        (2.0 * inv**2, k5 @ k3 @ k4),
        (3.0 * inv**3 - inv, k2),
        (3.0 * inv**3 - inv, k3),
        (3.0 * inv**3 - inv, k4),
        (-6.0 * inv**3, k2 @ k3 @ k4),
    ]
    anchor = PauliString.from_sites({site[1]: "Y", site[5]: "X"}, lattice.n_sites)
    return _hermitian(Phase.MINUS_I, ((c, multiply(anchor, k)) for c, k in polynomial))


def psi_first_order(lattice: Lattice, protocol: FloquetProtocol) -> OperatorSum:
    """Corner mode dressed to first order in (h_x + epsilon) and V_xx."""
    z_tilde, _ = corner_operators(lattice)
    factor = resonance_factor(protocol.eta)
    n = lattice.n_sites
    psi = OperatorSum(n, ((1.0, z_tilde),))
    field = protocol.h_x + protocol.epsilon
    if field:
        psi = psi + lambda_x(lattice).scaled(field / protocol.j_r)
    if protocol.v_xx:
        psi = psi + lambda_xx(lattice, protocol.eta).scaled(factor * protocol.v_xx / protocol.j_b)
    log.debug("psi_first_order: %d terms at eta=%.4g", len(psi), protocol.eta)
    return psi


def commutator_residual(lattice: Lattice, protocol: FloquetProtocol) -> tuple[float, float]:
    """(||[2H_eff, psi]||_F, ||[2H_eff, Z~]||_F), the dressed and bare leakage."""
    heff = build_heff(lattice, protocol)
    z_tilde, _ = corner_operators(lattice)
    bare = commutator(heff, OperatorSum(lattice.n_sites, ((1.0, z_tilde),)))
    dressed = commutator(heff, psi_first_order(lattice, protocol))
    return dressed.frobenius_norm(), bare.frobenius_norm()
