# models/lattice.py
"""Checkerboard geometry: blue sites on integer points, red sites shifted by (±1/2, ±1/2).

Coordinates are kept doubled (``x2 = 2x``) so that every comparison is exact.
Sites are numbered blue-first, row-major (y outer, x inner), then red.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

from models.pauli import PauliString
from utils.errors import CornerDtcError

log = logging.getLogger(__name__)

_DIAGONALS = ((1, 1), (-1, 1), (1, -1), (-1, -1))


class LatticeError(CornerDtcError):
    pass


class DegenerateGeometry(LatticeError):
    pass


class InvalidOffset(LatticeError):
    pass


class UnsupportedGeometry(LatticeError):
    pass


class Color(str, Enum):
    BLUE = "blue"
    RED = "red"


class SiteKind(str, Enum):
    CORNER = "corner"
    EDGE = "edge"
    BULK = "bulk"


_KIND_BY_DEGREE = {1: SiteKind.CORNER, 2: SiteKind.EDGE, 4: SiteKind.BULK}


@dataclass(frozen=True, slots=True)
class Site:
    index: int
    color: Color
    x2: int
    y2: int

    @property
    def x(self) -> float:
        return self.x2 / 2

    @property
    def y(self) -> float:
        return self.y2 / 2

    def distance_to(self, other: Site) -> float:
        return math.hypot(self.x2 - other.x2, self.y2 - other.y2) / 2


@dataclass(frozen=True)
class Lattice:
    blue_dims: tuple[int, int]
    red_dims: tuple[int, int]
    red_offset: tuple[float, float]
    sites: tuple[Site, ...]
    neighbors: tuple[tuple[int, ...], ...]

    # --- basic queries ---

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def _check(self, i: int) -> None:
        if not 0 <= i < self.n_sites:
            raise LatticeError(f"site {i} outside 0..{self.n_sites - 1}")

    def degree(self, i: int) -> int:
        self._check(i)
        return len(self.neighbors[i])

    def kind(self, i: int) -> SiteKind:
        return _KIND_BY_DEGREE[self.degree(i)]

    def color(self, i: int) -> Color:
        self._check(i)
        return self.sites[i].color

    @cached_property
    def _index_by_position(self) -> dict[tuple[int, int], int]:
        return {(s.x2, s.y2): s.index for s in self.sites}

    def site_index_at(self, x: float, y: float) -> int | None:
        return self._index_by_position.get((round(2 * x), round(2 * y)))

    def _at2(self, x2: int, y2: int) -> int | None:
        return self._index_by_position.get((x2, y2))

    def sites_of(self, color: Color) -> tuple[int, ...]:
        return tuple(s.index for s in self.sites if s.color is color)

    @property
    def blue_sites(self) -> tuple[int, ...]:
        return self.sites_of(Color.BLUE)

    @property
    def red_sites(self) -> tuple[int, ...]:
        return self.sites_of(Color.RED)

    @property
    def corners(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n_sites) if len(self.neighbors[i]) == 1)

    @property
    def blue_corners(self) -> tuple[int, ...]:
        return tuple(i for i in self.corners if self.sites[i].color is Color.BLUE)

    @property
    def red_corners(self) -> tuple[int, ...]:
        return tuple(i for i in self.corners if self.sites[i].color is Color.RED)

    @property
    def non_corner_sites(self) -> tuple[int, ...]:
        """Sites with degree >= 2: the index set of every K and P sum."""
        return tuple(i for i in range(self.n_sites) if len(self.neighbors[i]) >= 2)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (i, j) for i in range(self.n_sites) for j in self.neighbors[i] if i < j
        )

    @property
    def configuration(self) -> str:
        """Corner census label: a (4 of one color), b (2 of one color), c (one each), d (none)."""
        blue, red = len(self.blue_corners), len(self.red_corners)
        census = {(4, 0): "a", (0, 4): "a", (2, 0): "b", (0, 2): "b", (1, 1): "c", (0, 0): "d"}
        return census.get((blue, red), "other")

    # --- operator supports ---

    def stabilizer_support(self, i: int) -> PauliString:
        """K_i = X_i prod_{j ~ i} Z_j."""
        letters = {j: "Z" for j in self.neighbors[i]}
        letters[i] = "X"
        return PauliString.from_sites(letters, self.n_sites)

    def plaquette_support(self, i: int) -> PauliString:
        """P_i = prod_{j ~ i} Z_j."""
        self._check(i)
        return PauliString.from_sites({j: "Z" for j in self.neighbors[i]}, self.n_sites)

    def symmetry_generators(self) -> tuple[PauliString, PauliString]:
        """(G_r, G_b): X on every red site, X on every blue site."""
        g_r = PauliString.from_sites({i: "X" for i in self.red_sites}, self.n_sites)
        g_b = PauliString.from_sites({i: "X" for i in self.blue_sites}, self.n_sites)
        return g_r, g_b

    def global_flip(self) -> PauliString:
        return PauliString(self.n_sites, (1 << self.n_sites) - 1, 0)

    # --- derived sites ---

    @property
    def corner_distance(self) -> float:
        corners = [self.sites[i] for i in self.corners]
        return max(
            (a.distance_to(b) for a in corners for b in corners),
            default=0.0,
        )

    def central_bulk_site(self) -> int:
        candidates = [i for i in range(self.n_sites) if len(self.neighbors[i]) == 4]
        if not candidates:
            candidates = list(self.non_corner_sites) or [0]
        cx = sum(s.x2 for s in self.sites) / self.n_sites
        cy = sum(s.y2 for s in self.sites) / self.n_sites
        return min(
            candidates,
            key=lambda i: (math.hypot(self.sites[i].x2 - cx, self.sites[i].y2 - cy), i),
        )

    def first_edge_site(self) -> int:
        for i in range(self.n_sites):
            if len(self.neighbors[i]) == 2:
                return i
        raise UnsupportedGeometry("lattice has no edge site")

    def correlator_pair(self) -> tuple[int, int]:
        """Two same-color sites for the zz/xx order parameters.

        Two corners of one color if present; otherwise a corner and the site of
        its color farthest from it. Same color keeps sigma^z sigma^z even under
        both sublattice flips.
        """
        for group in (self.blue_corners, self.red_corners):
            if len(group) >= 2:
                return group[0], group[1]
        if self.blue_corners:
            anchor = self.blue_corners[0]
        elif self.red_corners:
            anchor = self.red_corners[0]
        else:
            anchor = self.blue_sites[0]
        same = [i for i in self.sites_of(self.sites[anchor].color) if i != anchor]
        if not same:
            raise UnsupportedGeometry("no second site of the anchor's color")
        far = max(same, key=lambda i: (self.sites[anchor].distance_to(self.sites[i]), -i))
        return anchor, far

    def corner_labels(self) -> dict[int, int]:
        """Local labels 1..8 around the first blue corner.

        1 corner, 5 its red neighbor, 2 and 3 the blue neighbors of 5 sharing a
        coordinate with 1 (x-step then y-step), 4 the blue site diagonal across
        5, and 6, 7, 8 the red sites one step from 5 toward 2, 3, 4.
        """
        if not self.blue_corners:
            raise UnsupportedGeometry("no blue corner")
        c = self.sites[self.blue_corners[0]]
        r = self.sites[self.neighbors[c.index][0]]
        dx, dy = r.x2 - c.x2, r.y2 - c.y2
        wanted = {
            1: (c.x2, c.y2),
            2: (c.x2 + 2 * dx, c.y2),
            3: (c.x2, c.y2 + 2 * dy),
            4: (c.x2 + 2 * dx, c.y2 + 2 * dy),
            5: (r.x2, r.y2),
            6: (r.x2 + 2 * dx, r.y2),
            7: (r.x2, r.y2 + 2 * dy),
            8: (r.x2 + 2 * dx, r.y2 + 2 * dy),
        }
        labels: dict[int, int] = {}
        for label, (x2, y2) in wanted.items():
            idx = self._at2(x2, y2)
            if idx is None:
                raise UnsupportedGeometry(f"corner neighborhood is missing site label {label}")
            labels[label] = idx
        return labels


def expected_ground_degeneracy(lattice: Lattice) -> int:
    """Each corner hosts one free qubit of the unperturbed stabilizer model."""
    return 2 ** len(lattice.corners)


def _offset_sign(value: float) -> int:
    if value == 0.5:
        return 1
    if value == -0.5:
        return -1
    raise InvalidOffset(f"offset component {value!r} is not +1/2 or -1/2")


def build_lattice(
    blue_dims: tuple[int, int],
    red_dims: tuple[int, int],
    red_offset: tuple[float, float] = (0.5, 0.5),
) -> Lattice:
    bx, by = (int(d) for d in blue_dims)
    rx, ry = (int(d) for d in red_dims)
    if min(bx, by, rx, ry) < 1:
        raise LatticeError(f"extents must be >= 1, got {blue_dims} and {red_dims}")
    sx, sy = (_offset_sign(float(o)) for o in red_offset)

    sites: list[Site] = []
    for y in range(by):
        for x in range(bx):
            sites.append(Site(len(sites), Color.BLUE, 2 * x, 2 * y))
    for y in range(ry):
        for x in range(rx):
            sites.append(Site(len(sites), Color.RED, 2 * x + sx, 2 * y + sy))

    position = {(s.x2, s.y2): s.index for s in sites}
    neighbors = tuple(
        tuple(sorted(
            position[(s.x2 + dx, s.y2 + dy)]
            for dx, dy in _DIAGONALS
            if (s.x2 + dx, s.y2 + dy) in position
        ))
        for s in sites
    )

    for s, nbrs in zip(sites, neighbors, strict=True):
        if len(nbrs) not in _KIND_BY_DEGREE:
            raise DegenerateGeometry(
                f"{s.color.value} site {s.index} at ({s.x}, {s.y}) has degree {len(nbrs)}"
            )

    lattice = Lattice(
        blue_dims=(bx, by),
        red_dims=(rx, ry),
        red_offset=(sx / 2, sy / 2),
        sites=tuple(sites),
        neighbors=neighbors,
    )
    log.debug(
        "Built lattice blue=%s red=%s n=%d corners=%s",
        lattice.blue_dims, lattice.red_dims, lattice.n_sites, lattice.corners,
    )
    return lattice
