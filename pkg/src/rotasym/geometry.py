"""
Polar grids on disks and annuli, plus exact reflections and rotations.

Cells are centred in both coordinates: ``r_i = r_inner + (i + 1/2) dr`` and
``phi_j = 2 pi j / ntheta``.  Field values are stored as arrays of shape
``(nr, ntheta)``, one row per ring.

Directions live on the half-angle lattice ``alpha_k = pi k / ntheta`` with
``k = 0 .. 2 ntheta - 1``.  Reflecting across the line perpendicular to such
a direction maps angular index ``j`` to ``(k + ntheta/2 - j) mod ntheta``, so
it is a pure index permutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

__all__ = [
    "RadialDomain",
    "PolarGrid",
    "Direction",
    "Field",
    "GridError",
    "PLANE_TOL",
    "build_grid",
    "reflect_field",
    "reflect_values",
    "reflection_index",
    "half_domain_mask",
    "rotate_field",
    "rotate_direction",
]

#: cells with ``|x . e| < PLANE_TOL * r_outer`` are treated as lying on H(e)
PLANE_TOL = 1e-12

# angles closer than this (in half-steps) count as lattice aligned
_ALIGN_TOL = 1e-9


class GridError(ValueError):
    """Invalid domain or grid parameters."""


@dataclass(frozen=True)
class RadialDomain:
    """A disk (``r_inner == 0``) or an annulus centred at the origin."""

    r_inner: float = 0.0
    r_outer: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.r_inner) and math.isfinite(self.r_outer)):
            raise GridError("radii must be finite")
        if self.r_inner < 0:
            raise GridError(f"r_inner must be >= 0, got {self.r_inner}")
        if self.r_outer <= self.r_inner:
            raise GridError(
                f"need r_outer > r_inner, got r_inner={self.r_inner}, r_outer={self.r_outer}"
            )

    @property
    def kind(self) -> str:
        return "disk" if self.r_inner == 0 else "annulus"

    @classmethod
    def disk(cls, radius: float = 1.0) -> "RadialDomain":
        return cls(0.0, radius)

    @classmethod
    def annulus(cls, r_inner: float, r_outer: float) -> "RadialDomain":
        if r_inner <= 0:
            raise GridError("an annulus needs r_inner > 0")
        return cls(r_inner, r_outer)


@dataclass(frozen=True)
class PolarGrid:
    domain: RadialDomain
    nr: int
    ntheta: int

    @cached_property
    def dr(self) -> float:
        return (self.domain.r_outer - self.domain.r_inner) / self.nr

    @cached_property
    def dphi(self) -> float:
        return 2 * math.pi / self.ntheta

    @cached_property
    def r(self) -> np.ndarray:
        r = self.domain.r_inner + (np.arange(self.nr) + 0.5) * self.dr
        r.setflags(write=False)
        return r

    @cached_property
    def phi(self) -> np.ndarray:
        phi = self.dphi * np.arange(self.ntheta)
        phi.setflags(write=False)
        return phi

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nr, self.ntheta)

    @property
    def n_directions(self) -> int:
        """Size of the half-angle direction lattice."""
        return 2 * self.ntheta

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(R, PHI)`` arrays of cell-centre coordinates."""
        return np.meshgrid(self.r, self.phi, indexing="ij")

    def cartesian(self) -> tuple[np.ndarray, np.ndarray]:
        R, P = self.mesh()
        return R * np.cos(P), R * np.sin(P)

    def cell_areas(self) -> np.ndarray:
        """Polar cell areas ``r_i dr dphi`` broadcast to the grid shape."""
        return np.broadcast_to((self.r * self.dr * self.dphi)[:, None], self.shape)

    def zeros(self, t: float = 0.0) -> "Field":
        return Field(self, np.zeros(self.shape), t)

    def from_function(self, func, t: float = 0.0) -> "Field":
        """Sample ``func(r, phi)`` at the cell centres."""
        R, P = self.mesh()
        values = np.asarray(func(R, P), dtype=float)
        return Field(self, np.broadcast_to(values, self.shape).copy(), t)


def build_grid(domain: RadialDomain, nr: int, ntheta: int) -> PolarGrid:
    """Build a cell-centred polar grid; ``ntheta`` must be even."""
    if not isinstance(domain, RadialDomain):
        raise GridError("domain must be a RadialDomain")
    if int(nr) != nr or nr < 4:
        raise GridError(f"nr must be an integer >= 4, got {nr}")
    if int(ntheta) != ntheta or ntheta < 8:
        raise GridError(f"ntheta must be an integer >= 8, got {ntheta}")
    if ntheta % 2:
        raise GridError(f"ntheta must be even, got {ntheta}")
    return PolarGrid(domain, int(nr), int(ntheta))


@dataclass(frozen=True)
class Direction:
    """Unit vector ``(cos angle, sin angle)`` with angle reduced to [0, 2 pi)."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % (2 * math.pi))

    @classmethod
    def from_index(cls, k: int, ntheta: int) -> "Direction":
        """Direction ``pi k / ntheta`` on the half-angle lattice."""
        k = int(k) % (2 * ntheta)
        return cls(math.pi * k / ntheta)

    @classmethod
    def from_vector(cls, x: float, y: float) -> "Direction":
        return cls(math.atan2(y, x))

    @property
    def vector(self) -> np.ndarray:
        return np.array([math.cos(self.angle), math.sin(self.angle)])

    def __neg__(self) -> "Direction":
        return Direction(self.angle + math.pi)

    def lattice_index(self, ntheta: int) -> int | None:
        """Half-angle lattice index of this direction, or None if off-lattice."""
        x = self.angle * ntheta / math.pi
        k = round(x)
        if abs(x - k) > _ALIGN_TOL:
            return None
        return k % (2 * ntheta)

    def require_index(self, ntheta: int) -> int:
        k = self.lattice_index(ntheta)
        if k is None:
            raise GridError(
                f"direction {self.angle!r} is not on the half-angle lattice of ntheta={ntheta}"
            )
        return k

    @property
    def degrees(self) -> float:
        return math.degrees(self.angle)


@dataclass(frozen=True, eq=False)
class Field:
    """A scalar snapshot ``u(., t)`` on a polar grid."""

    grid: PolarGrid
    values: np.ndarray
    t: float = 0.0
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise GridError("field values must be finite")
        if self.t < 0:
            raise GridError("field time must be >= 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values, t: float | None = None) -> "Field":
        return Field(self.grid, values, self.t if t is None else t)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        if isinstance(other, Field):
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def reflection_index(ntheta: int, k: int) -> np.ndarray:
    """Angular index map of the reflection sigma_e for ``e = e_k``.

    ``(u o sigma_e)[:, j] == u[:, reflection_index(ntheta, k)[j]]``.
    """
    j = np.arange(ntheta)
    return (k + ntheta // 2 - j) % ntheta


def reflect_values(values: np.ndarray, k: int) -> np.ndarray:
    """Values of ``u o sigma_{e_k}`` for a lattice direction index ``k``."""
    return values[:, reflection_index(values.shape[1], k)]


def reflect_field(field: Field, e: Direction) -> Field:
    """Return ``u o sigma_e``.

    Lattice directions give an exact permutation of angular indices; other
    directions fall back to periodic linear interpolation in phi.
    """
    grid = field.grid
    k = e.lattice_index(grid.ntheta)
    if k is not None:
        return field.with_values(reflect_values(field.values, k))
    # target angle 2 alpha + pi - phi_j, in units of dphi
    pos = ((2 * e.angle + math.pi) / grid.dphi - np.arange(grid.ntheta)) % grid.ntheta
    lo = np.floor(pos).astype(int) % grid.ntheta
    hi = (lo + 1) % grid.ntheta
    w = pos - np.floor(pos)
    v = field.values
    return field.with_values((1 - w) * v[:, lo] + w * v[:, hi])


def half_domain_mask(grid: PolarGrid, e: Direction) -> np.ndarray:
    """Boolean mask of cells in B(e) = {x . e > 0}; on-plane cells excluded."""
    R, P = grid.mesh()
    dot = R * np.cos(P - e.angle)
    return dot > PLANE_TOL * grid.domain.r_outer


def rotate_field(field: Field, steps: int) -> Field:
    """Rotate counter-clockwise by ``steps`` angular cells (exact shift)."""
    return field.with_values(np.roll(field.values, int(steps), axis=1))


def rotate_direction(e: Direction, steps: int, ntheta: int) -> Direction:
    """Image of ``e`` under the grid rotation by ``steps`` angular cells."""
    k = e.lattice_index(ntheta)
    if k is not None:
        return Direction.from_index(k + 2 * int(steps), ntheta)
    return Direction(e.angle + steps * 2 * math.pi / ntheta)
