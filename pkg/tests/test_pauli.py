import numpy as np
import pytest
import scipy.linalg

from models.pauli import (
    DimensionMismatch,
    NonHermitianTerm,
    OperatorParseError,
    OperatorSum,
    PauliString,
    Phase,
    apply_rotation,
    commutator,
    commutes,
    multiply,
)
from models.state import all_up, fidelity, product_state, random_state
from tests.conftest import dense_pauli


def test_labels_are_one_based():
    s = PauliString.from_label("X1 Y3 Z4", 4)
    assert s.letter(0) == "X"
    assert s.letter(2) == "Y"
    assert s.letter(3) == "Z"
    assert s.label() == "X1 Y3 Z4"
    assert s.weight == 3
    assert s.support == (0, 2, 3)


@pytest.mark.parametrize(
    "a, b, label, phase",
    [
        ("X1", "Z1", "Y1", Phase.MINUS_I),
        ("Z1", "X1", "Y1", Phase.I),
        ("Y1", "Y1", "I", Phase.ONE),
        ("X1 Z2", "Z1 X2", "Y1 Y2", Phase.ONE),
    ],
)
def test_products(a, b, label, phase):
    p = multiply(PauliString.from_label(a, 2), PauliString.from_label(b, 2))
    assert p.label() == label
    assert p.phase is phase


def test_commutation():
    x1 = PauliString.from_label("X1", 2)
    z1 = PauliString.from_label("Z1", 2)
    assert not commutes(x1, z1)
    assert commutes(PauliString.from_label("X1 X2", 2), PauliString.from_label("Z1 Z2", 2))


def test_bad_input():
    with pytest.raises(DimensionMismatch):
        PauliString.single(3, "X", 3)
    with pytest.raises(OperatorParseError):
        PauliString.from_label("Q2", 3)
    with pytest.raises(OperatorParseError):
        PauliString.from_label("X1 Z1", 3)
    with pytest.raises(NonHermitianTerm):
        OperatorSum(1, ((1.0, PauliString.single(0, "X", 1).with_phase(Phase.I)),))


def test_canonical_terms():
    x = PauliString.from_label("X1", 2)
    tiny = PauliString.from_label("Z2", 2)
    op = OperatorSum(2, ((1.0, x), (0.5, x), (2.0, x.with_phase(Phase.MINUS_ONE)), (1e-16, tiny)))
    assert len(op) == 1
    assert op.coefficient(x) == pytest.approx(-0.5)


def test_text_round_trip():
    op = OperatorSum.from_text("0.31 * X3 X7\n1.0 * X1 Z5  # corner\n", 8)
    assert OperatorSum.from_text(op.to_text(), 8).terms == op.terms
    with pytest.raises(OperatorParseError):
        OperatorSum.from_text("X1 Z5", 8)


def test_apply_matches_kron_matrices(rng):
    n = 4
    terms = [
        (0.7, {0: "X", 2: "Z"}),
        (-1.3, {1: "Y"}),
        (0.4, {0: "Y", 3: "Y"}),
        (0.2, {1: "Z", 2: "X", 3: "Y"}),
    ]
    op = OperatorSum(n, tuple((c, PauliString.from_sites(letters, n)) for c, letters in terms))
    dense = sum(c * dense_pauli(letters, n) for c, letters in terms)
    v = random_state(n, rng)
    assert np.allclose(op.apply(v), dense @ v)
    assert np.allclose(op.to_dense(), dense)
    assert op.expectation(v) == pytest.approx(float(np.real(np.vdot(v, dense @ v))))


def test_real_flag():
    n = 2
    assert OperatorSum(n, ((1.0, PauliString.from_label("Y1 Y2", n)),)).is_real
    assert not OperatorSum(n, ((1.0, PauliString.from_label("Y1", n)),)).is_real


def test_commutator_matches_matrices():
    n = 2
    a = OperatorSum(n, ((0.8, PauliString.from_label("X1 X2", n)), (0.3, PauliString.from_label("Z1", n))))
    b = OperatorSum(n, ((1.1, PauliString.from_label("Z1 Z2", n)), (0.5, PauliString.from_label("Y2", n))))
    da, db = a.to_dense(), b.to_dense()
    assert np.allclose(commutator(a, b).to_dense(), -1j * (da @ db - db @ da))


def test_norms():
    op = OperatorSum(2, ((3.0, PauliString.from_label("X1", 2)), (-4.0, PauliString.from_label("Z2", 2))))
    assert op.frobenius_norm() == pytest.approx(5.0)
    assert op.norm_bound() == pytest.approx(7.0)


def test_rotation_matches_expm(rng):
    n = 3
    string = PauliString.from_label("X1 Y2 Z3", n)
    v = random_state(n, rng)
    expected = scipy.linalg.expm(-0.37j * dense_pauli({0: "X", 1: "Y", 2: "Z"}, n)) @ v
    assert np.allclose(apply_rotation(string, 0.37, v), expected)


def test_product_state_order():
    # site 0 is the least significant bit
    v = product_state("10")
    assert v[1] == 1.0
    assert np.count_nonzero(v) == 1


def test_adjoint_and_phase_values():
    s = PauliString.from_label("Y1 X2", 2).with_phase(Phase.I)
    assert s.adjoint().phase is Phase.MINUS_I
    assert s.phase.value_complex == 1j
    assert multiply(s, s.adjoint()).is_identity
    assert multiply(s, s.adjoint()).phase is Phase.ONE


def test_fidelity():
    assert fidelity(all_up(2), product_state("00")) == pytest.approx(1.0)
    assert fidelity(all_up(2), product_state("+0")) == pytest.approx(0.5)
    assert fidelity(all_up(2), product_state("10")) == pytest.approx(0.0)
