# models/pauli.py
"""Signed Pauli strings, real-weighted operator sums and their matrix-free action.

A ``PauliString`` is ``phase * (sigma_0 ⊗ sigma_1 ⊗ ...)`` where site ``s`` carries
X if only bit ``s`` of ``x_mask`` is set, Z if only bit ``s`` of ``z_mask`` is set and
Y if both are.  Internally the product rules go through the factorization
``Y = -i Z X``, i.e. ``sigma = (-i)^{#Y} Z^z X^x``.

Text format (configs, goldens, logs) uses 1-based site labels::

    0.31 * X3 X7
    1.0 * X1 Z5
"""
from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property

import numpy as np
import numpy.typing as npt
from scipy import sparse

from utils.errors import CornerDtcError
from utils.kernels import apply_pauli_terms

log = logging.getLogger(__name__)

MAX_SITES = 30
DROP_BELOW = 1e-14
HERMITIAN_RESIDUAL = 1e-10


class PauliError(CornerDtcError):
    pass


class DimensionMismatch(PauliError):
    pass


class NonHermitianResidual(PauliError):
    pass


class NonHermitianTerm(PauliError):
    pass


class OperatorParseError(PauliError):
    pass


def _popcount(x: int) -> int:
    return x.bit_count()


class Phase(IntEnum):
    """Exact phase i^k, stored as the quarter-turn count k."""

    ONE = 0
    I = 1  # noqa: E741
    MINUS_ONE = 2
    MINUS_I = 3

    @classmethod
    def quarter_turns(cls, k: int) -> Phase:
        return cls(k % 4)

    @property
    def value_complex(self) -> complex:
        return (1 + 0j, 1j, -1 + 0j, -1j)[self]

    def conjugate(self) -> Phase:
        return Phase.quarter_turns(-int(self))

    def __str__(self) -> str:
        return ("+1", "+i", "-1", "-i")[self]


_LETTERS = {(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {"X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_MINUS_I_POWERS = (1 + 0j, -1j, -1 + 0j, 1j)


@dataclass(frozen=True, slots=True)
class PauliString:
    n_sites: int
    x_mask: int = 0
    z_mask: int = 0
    phase: Phase = Phase.ONE

    def __post_init__(self) -> None:
        if not 1 <= self.n_sites <= MAX_SITES:
            raise DimensionMismatch(f"n_sites={self.n_sites} outside 1..{MAX_SITES}")
        limit = 1 << self.n_sites
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise DimensionMismatch(f"mask exceeds {self.n_sites} sites")
        if not isinstance(self.phase, Phase):
            object.__setattr__(self, "phase", Phase.quarter_turns(int(self.phase)))

    # --- constructors ---

    @classmethod
    def identity(cls, n_sites: int) -> PauliString:
        return cls(n_sites)

    @classmethod
    def single(cls, site: int, letter: str, n_sites: int) -> PauliString:
        return cls.from_sites({site: letter}, n_sites)

    @classmethod
    def from_sites(cls, letters: Mapping[int, str], n_sites: int) -> PauliString:
        x = z = 0
        for site, letter in letters.items():
            if not 0 <= site < n_sites:
                raise DimensionMismatch(f"site {site} outside 0..{n_sites - 1}")
            key = letter.upper()
            if key == "I":
                continue
            if key not in _BITS:
                raise OperatorParseError(f"unknown Pauli letter {letter!r}")
            bx, bz = _BITS[key]
            x ^= bx << site
            z ^= bz << site
        return cls(n_sites, x, z)

    @classmethod
    def from_label(cls, text: str, n_sites: int) -> PauliString:
        """Parse ``"X1 Z7"`` (1-based sites); ``"I"`` is the identity."""
        letters: dict[int, str] = {}
        for token in text.split():
            if token.upper() == "I":
                continue
            letter, digits = token[0], token[1:]
            if not digits.isdigit():
                raise OperatorParseError(f"bad Pauli token {token!r}")
            site = int(digits) - 1
            if site in letters:
                raise OperatorParseError(f"site {site + 1} repeated in {text!r}")
            letters[site] = letter
        return cls.from_sites(letters, n_sites)

    # --- properties ---

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    @property
    def n_y(self) -> int:
        return _popcount(self.x_mask & self.z_mask)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (Phase.ONE, Phase.MINUS_ONE)

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x_mask | self.z_mask
        return tuple(s for s in range(self.n_sites) if mask >> s & 1)

    @property
    def key(self) -> tuple[int, int]:
        return self.x_mask, self.z_mask

    def letter(self, site: int) -> str:
        bits = (self.x_mask >> site & 1, self.z_mask >> site & 1)
        return _LETTERS.get(bits, "I")

    def with_phase(self, phase: Phase) -> PauliString:
        return PauliString(self.n_sites, self.x_mask, self.z_mask, phase)

    def adjoint(self) -> PauliString:
        return self.with_phase(self.phase.conjugate())

    def label(self) -> str:
        if self.is_identity:
            return "I"
        return " ".join(f"{self.letter(s)}{s + 1}" for s in self.support)

    def __str__(self) -> str:
        body = self.label()
        return body if self.phase is Phase.ONE else f"{self.phase} {body}"

    def __matmul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)


def _check_sizes(a_sites: int, b_sites: int) -> None:
    if a_sites != b_sites:
        raise DimensionMismatch(f"{a_sites} vs {b_sites} sites")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    _check_sizes(a.n_sites, b.n_sites)
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    k = (
        a.phase
        + b.phase
        - a.n_y
        - b.n_y
        + 2 * _popcount(a.x_mask & b.z_mask)
        + _popcount(x & z)
    )
    return PauliString(a.n_sites, x, z, Phase.quarter_turns(k))


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_sizes(a.n_sites, b.n_sites)
    overlap = _popcount(a.x_mask & b.z_mask) + _popcount(a.z_mask & b.x_mask)
    return overlap % 2 == 0


Term = tuple[float, PauliString]


def _canonical_terms(n_sites: int, raw: Iterable[Term]) -> tuple[Term, ...]:
    merged: dict[tuple[int, int], float] = {}
    for coeff, string in raw:
        _check_sizes(n_sites, string.n_sites)
        c = float(coeff)
        if not math.isfinite(c):
            raise PauliError(f"non-finite coefficient on {string.label()}")
        if string.phase is Phase.MINUS_ONE:
            c = -c
        elif string.phase is not Phase.ONE:
            raise NonHermitianTerm(f"term {string} is not Hermitian")
        merged[string.key] = merged.get(string.key, 0.0) + c
    return tuple(
        (c, PauliString(n_sites, x, z))
        for (x, z), c in merged.items()
        if abs(c) >= DROP_BELOW
    )


@dataclass(frozen=True)
class OperatorSum:
    """Hermitian operator sum_t c_t P_t with real c_t and phase-free strings P_t.

    Construction canonicalizes: -1 phases fold into the coefficient, duplicate
    strings merge, |c| < 1e-14 is dropped.  Insertion order is kept.
    """

    n_sites: int
    terms: tuple[Term, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", _canonical_terms(self.n_sites, self.terms))

    @classmethod
    def zero(cls, n_sites: int) -> OperatorSum:
        return cls(n_sites)

    @classmethod
    def from_strings(cls, strings: Iterable[PauliString], coeff: float = 1.0) -> OperatorSum:
        items = list(strings)
        if not items:
            raise PauliError("from_strings needs at least one string")
        return cls(items[0].n_sites, tuple((coeff, s) for s in items))

    @classmethod
    def from_text(cls, text: str, n_sites: int) -> OperatorSum:
        terms: list[Term] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "*" not in line:
                raise OperatorParseError(f"line {lineno}: expected '<coeff> * <paulis>'")
            coeff_text, body = line.split("*", 1)
            try:
                coeff = float(coeff_text)
            except ValueError as exc:
                raise OperatorParseError(f"line {lineno}: bad coefficient {coeff_text!r}") from exc
            terms.append((coeff, PauliString.from_label(body, n_sites)))
        return cls(n_sites, tuple(terms))

    def to_text(self) -> str:
        return "\n".join(f"{c!r} * {s.label()}" for c, s in self.terms)

    # --- algebra ---

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    def __add__(self, other: OperatorSum) -> OperatorSum:
        _check_sizes(self.n_sites, other.n_sites)
        return OperatorSum(self.n_sites, self.terms + other.terms)

    def __sub__(self, other: OperatorSum) -> OperatorSum:
        return self + other.scaled(-1.0)

    def __neg__(self) -> OperatorSum:
        return self.scaled(-1.0)

    def __mul__(self, factor: float) -> OperatorSum:
        return self.scaled(factor)

    __rmul__ = __mul__

    def scaled(self, factor: float) -> OperatorSum:
        return OperatorSum(self.n_sites, tuple((c * factor, s) for c, s in self.terms))

    def coefficient(self, string: PauliString) -> float:
        for c, s in self.terms:
            if s.key == string.key:
                return c * (-1.0 if string.phase is Phase.MINUS_ONE else 1.0)
        return 0.0

    def commutes_with(self, string: PauliString) -> bool:
        return all(commutes(s, string) for _, s in self.terms)

    def frobenius_norm(self) -> float:
        """Hilbert-Schmidt norm normalized by 2^(N/2): sqrt(sum c_t^2)."""
        return math.sqrt(sum(c * c for c, _ in self.terms))

    def norm_bound(self) -> float:
        return sum(abs(c) for c, _ in self.terms)

    @property
    def is_real(self) -> bool:
        """True when the matrix in the computational basis is real."""
        return all(s.n_y % 2 == 0 for _, s in self.terms)

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    # --- numerics ---

    @cached_property
    def _kernel_arrays(self) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64], np.ndarray]:
        x = np.array([s.x_mask for _, s in self.terms], dtype=np.int64)
        z = np.array([s.z_mask for _, s in self.terms], dtype=np.int64)
        # (-i)^{#Y} folds the named-Pauli phase into the coefficient
        raw = np.array(
            [c * _MINUS_I_POWERS[s.n_y % 4] for c, s in self.terms], dtype=np.complex128
        )
        coeffs: np.ndarray = raw.real.copy() if self.is_real else raw
        return x, z, coeffs

    def apply(self, v: np.ndarray) -> np.ndarray:
        if v.shape[0] != self.dim:
            raise DimensionMismatch(f"vector of length {v.shape[0]} for {self.n_sites} sites")
        x, z, coeffs = self._kernel_arrays
        if v.ndim == 2:
            return np.stack([apply_pauli_terms(x, z, coeffs, v[:, j]) for j in range(v.shape[1])], axis=1)
        return apply_pauli_terms(x, z, coeffs, v)

    def expectation(self, v: np.ndarray) -> float:
        raw = complex(np.vdot(v, self.apply(v)))
        if abs(raw.imag) >= HERMITIAN_RESIDUAL:
            raise NonHermitianResidual(f"Im<v|op|v> = {raw.imag:.3e}")
        return raw.real

    def to_sparse(self) -> sparse.csr_matrix:
        """Explicit matrix, for oracles and small-system export only."""
        dim = self.dim
        rows = np.arange(dim, dtype=np.int64)
        x, z, coeffs = self._kernel_arrays
        mat = sparse.csr_matrix((dim, dim), dtype=coeffs.dtype if len(coeffs) else np.float64)
        for xt, zt, ct in zip(x, z, coeffs, strict=True):
            signs = 1.0 - 2.0 * (np.bitwise_count(rows & zt) % 2)
            mat = mat + sparse.csr_matrix((ct * signs, (rows, rows ^ xt)), shape=(dim, dim))
        return mat

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()


def apply(op: OperatorSum, v: np.ndarray) -> np.ndarray:
    return op.apply(v)


def expectation(op: OperatorSum, v: np.ndarray) -> float:
    return op.expectation(v)


def commutator(a: OperatorSum, b: OperatorSum) -> OperatorSum:
    """Return the Hermitian operator -i[a, b]."""
    _check_sizes(a.n_sites, b.n_sites)
    terms: list[Term] = []
    for ca, sa in a.terms:
        for cb, sb in b.terms:
            if commutes(sa, sb):
                continue
            prod = multiply(sa, sb)
            # -i * 2 * (i^k) with k odd
            sign = 2.0 if prod.phase is Phase.I else -2.0
            terms.append((sign * ca * cb, prod.with_phase(Phase.ONE)))
    return OperatorSum(a.n_sites, tuple(terms))


def apply_rotation(string: PauliString, theta: float, v: np.ndarray) -> np.ndarray:
    """exp(-i theta P) v for a Hermitian string P (P^2 = 1)."""
    if not string.is_hermitian:
        raise NonHermitianTerm(f"rotation generator {string} is not Hermitian")
    p_v = OperatorSum(string.n_sites, ((1.0, string),)).apply(v)
    return math.cos(theta) * v - 1j * math.sin(theta) * p_v
