from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from models.lattice import Lattice, build_lattice
from models.protocol import FloquetProtocol
from services.observables import TimeSeries
from utils.errors import CornerDtcError

DEFAULT_THRESHOLD = 1.0 / math.e
DEFAULT_WINDOW = 10


class AnalysisError(CornerDtcError):
    pass


class EmptySeries(AnalysisError):
    pass


class GridMismatch(AnalysisError):
    pass


@dataclass(frozen=True, slots=True)
class Lifetime:
    tau: float
    censored: bool
    crossing: int | None = None


@dataclass(frozen=True, slots=True)
class LatticeSpec:
    """Picklable recipe for a lattice, so jobs can cross process boundaries."""

    blue_dims: tuple[int, int]
    red_dims: tuple[int, int]
    red_offset: tuple[float, float] = (0.5, 0.5)

    @classmethod
    def of(cls, lattice: Lattice) -> LatticeSpec:
        return cls(lattice.blue_dims, lattice.red_dims, lattice.red_offset)

    def build(self) -> Lattice:
        return build_lattice(self.blue_dims, self.red_dims, self.red_offset)


@dataclass(frozen=True, slots=True)
class LifetimeJob:
    key: float
    lattice: LatticeSpec
    protocol: FloquetProtocol
    observables: tuple[str, ...]
    n_max: int
    initial: str = "ground"
    threshold: float = DEFAULT_THRESHOLD
    window: int = DEFAULT_WINDOW
    tol: float = 1e-9
    seed: int = 0


@dataclass(slots=True)
class LifetimeRow:
    key: float
    lifetimes: dict[str, Lifetime]
    series: dict[str, TimeSeries] = field(default_factory=dict)
    stats: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class PhaseJob:
    key: float
    lattice: LatticeSpec
    protocol: FloquetProtocol
    seed: int = 0


@dataclass(frozen=True, slots=True)
class PhaseRow:
    key: float
    o_m: float
    zz: float
    xx: float
    n_sites: int


@dataclass(frozen=True, slots=True)
class DualityRow:
    """Trivial-phase onsets on V_xx lines at V_zz = v (f1) and at V_zz = 1/v (f2); None when not reached."""

    v: float
    f1: float | None
    f2: float | None


@dataclass(frozen=True, slots=True)
class GapRow:
    distance: float
    gap: float
    tau_l: float
    n_sites: int
