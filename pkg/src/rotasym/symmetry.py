"""
Reflection dominance, the dominance set of directions, and foliated Schwarz
symmetry on the polar grid.

For a lattice direction ``e`` the reflection difference is
``w_e = u - u o sigma_e`` restricted to the half-domain ``B(e)``.  A set of
fields is *dominant* for ``e`` when ``w_e >= 0`` there for all of them; the
set of such directions is the dominance set computed by :func:`compute_M`.
All verdicts are taken on the half-angle lattice, where reflections are exact
index permutations, with one tolerance and a three-way sign classification:

* ``symmetric``       ``|w_e| <= tol`` everywhere
* ``dominant_plus``   ``w_e >= -tol`` and ``w_e > tol`` somewhere
* ``dominant_minus``  the mirror image
* ``mixed``           anything else
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .geometry import (
    Direction,
    Field,
    GridError,
    PolarGrid,
    half_domain_mask,
    reflect_values,
)

__all__ = [
    "DOMINANT_PLUS",
    "DOMINANT_MINUS",
    "SYMMETRIC",
    "MIXED",
    "ReflectionReport",
    "DirectionSet",
    "FssReport",
    "AxisDetection",
    "SweepResult",
    "default_tol",
    "reflection_report",
    "check_U1",
    "compute_M",
    "reflection_points",
    "check_geo4",
    "geo4_points",
    "lemma1_conclusion",
    "fss_symmetrize",
    "fss_deficit",
    "detect_axis",
    "rotating_plane_sweep",
]

DOMINANT_PLUS = "dominant_plus"
DOMINANT_MINUS = "dominant_minus"
SYMMETRIC = "symmetric"
MIXED = "mixed"

#: relative tolerance used when none is given (algebraic identities)
ALGEBRAIC_RTOL = 1e-8


def _as_fields(fields) -> list[Field]:
    if isinstance(fields, Field):
        return [fields]
    fields = list(fields)
    if not fields:
        raise ValueError("need at least one field")
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise GridError("all fields must share one grid")
    return fields


def default_tol(fields) -> float:
    """``1e-8`` times the largest sup-norm among ``fields``."""
    return ALGEBRAIC_RTOL * max(f.sup_norm() for f in _as_fields(fields))


def _classify(w_min: float, w_max: float, tol: float) -> str:
    if max(abs(w_min), abs(w_max)) <= tol:
        return SYMMETRIC
    if w_min >= -tol and w_max > tol:
        return DOMINANT_PLUS
    if w_max <= tol and w_min < -tol:
        return DOMINANT_MINUS
    return MIXED


@dataclass(frozen=True)
class ReflectionReport:
    direction: Direction
    index: int
    w_min: float
    w_max: float
    classification: str
    tol: float

    @property
    def in_M(self) -> bool:
        return self.classification in (DOMINANT_PLUS, SYMMETRIC)

    @property
    def margin(self) -> float:
        """How far the strict part of the dominance clears the tolerance."""
        return self.w_max


@lru_cache(maxsize=4096)
def _mask(grid: PolarGrid, k: int) -> np.ndarray:
    mask = half_domain_mask(grid, Direction.from_index(k, grid.ntheta))
    mask.setflags(write=False)
    return mask


def _w_extrema(fields: Sequence[Field], k: int) -> tuple[float, float]:
    grid = fields[0].grid
    mask = _mask(grid, k)
    lo, hi = math.inf, -math.inf
    for f in fields:
        w = (f.values - reflect_values(f.values, k))[mask]
        lo = min(lo, float(w.min()))
        hi = max(hi, float(w.max()))
    return lo, hi


def _report_at(fields: Sequence[Field], k: int, tol: float) -> ReflectionReport:
    n = fields[0].grid.ntheta
    lo, hi = _w_extrema(fields, k)
    return ReflectionReport(Direction.from_index(k, n), k % (2 * n), lo, hi,
                            _classify(lo, hi, tol), tol)


def reflection_report(fields, e: Direction, tol: float | None = None) -> ReflectionReport:
    """Classify ``w_e`` over ``B(e)`` jointly for one or more fields."""
    fields = _as_fields(fields)
    tol = default_tol(fields) if tol is None else tol
    k = e.require_index(fields[0].grid.ntheta)
    return _report_at(fields, k, tol)


def check_U1(u0: Field, e: Direction, tol: float | None = None) -> bool:
    """True iff ``u0 >= u0 o sigma_e`` on ``B(e)`` with strict excess above ``tol``."""
    return reflection_report(u0, e, tol).classification == DOMINANT_PLUS


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """Membership of every half-angle lattice direction, with its arcs.

    Arcs are ``(start, length)`` pairs of lattice indices running
    counter-clockwise; a full lattice is the single arc ``(0, 2 ntheta)``.
    """

    ntheta: int
    members: np.ndarray
    tol: float = 0.0
    reports: tuple = ()

    def __post_init__(self):
        members = np.array(self.members, dtype=bool)
        if members.shape != (2 * self.ntheta,):
            raise ValueError("membership must cover the 2*ntheta lattice directions")
        members.setflags(write=False)
        object.__setattr__(self, "members", members)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_full(self) -> bool:
        return bool(self.members.all())

    @property
    def is_empty(self) -> bool:
        return not self.members.any()

    def __contains__(self, e) -> bool:
        k = e if isinstance(e, (int, np.integer)) else e.require_index(self.ntheta)
        return bool(self.members[int(k) % self.size])

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.members)

    @cached_property
    def arcs(self) -> list[tuple[int, int]]:
        m = self.members
        n = self.size
        if m.all():
            return [(0, n)]
        starts = np.flatnonzero(m & ~np.roll(m, 1))
        arcs = []
        for s in starts:
            length = 0
            while m[(s + length) % n]:
                length += 1
            arcs.append((int(s), length))
        return arcs

    def arc_angles(self) -> list[tuple[float, float]]:
        """Arcs as (start angle, end angle) in radians, end >= start."""
        h = math.pi / self.ntheta
        return [(s * h, (s + length - 1) * h) for s, length in self.arcs]

    def antipodal_cover(self) -> bool:
        """Every direction or its antipode is a member (lattice form of S = M u -M)."""
        return bool(np.all(self.members | np.roll(self.members, self.ntheta)))

    def uncovered(self) -> np.ndarray:
        """Lattice indices k with neither k nor its antipode a member."""
        return np.flatnonzero(~(self.members | np.roll(self.members, self.ntheta)))


def compute_M(fields, tol: float | None = None) -> DirectionSet:
    """Directions on which every field dominates its reflection (or is symmetric)."""
    fields = _as_fields(fields)
    tol = default_tol(fields) if tol is None else tol
    n = fields[0].grid.ntheta
    reports = tuple(_report_at(fields, k, tol) for k in range(2 * n))
    return DirectionSet(n, [r.in_M for r in reports], tol, reports)


# ---------------------------------------------------------------------------
# one-dimensional periodic samples

def _periodic_samples(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or len(v) < 2:
        raise ValueError("expected a 1-d array of periodic samples")
    return v


def _half_index(eta, n: int) -> int:
    if isinstance(eta, Direction):
        return eta.require_index(n)
    x = float(eta) * n / math.pi
    k = round(x)
    if abs(x - k) > 1e-9:
        raise GridError(f"angle {eta!r} is not on the half-angle lattice")
    return k % (2 * n)


def _symmetry_defects(v: np.ndarray) -> np.ndarray:
    """``max_phi |v(eta + phi) - v(eta - phi)|`` for every lattice half-angle eta."""
    n = len(v)
    j = np.arange(n)
    m = np.arange(2 * n)[:, None]
    return np.max(np.abs(v[None, :] - v[(m - j) % n]), axis=1)


def reflection_points(v, tol: float = 0.0) -> np.ndarray:
    """Lattice half-angles in [0, 2 pi) about which ``v`` is mirror symmetric."""
    v = _periodic_samples(v)
    n = len(v)
    return np.flatnonzero(_symmetry_defects(v) <= tol) * math.pi / n


def _geo4_table(v: np.ndarray):
    """Differences ``v(eta + phi) - v(eta - phi)`` for phi in [0, pi], every eta."""
    n = len(v)
    i = np.arange(n)
    m = np.arange(2 * n)[:, None]
    diff = v[None, :] - v[(m - i) % n]
    d = (2 * i[None, :] - m) % (2 * n)
    return diff, d <= n


def check_geo4(v, eta, tol: float = 0.0) -> bool:
    """``v(eta + phi) >= v(eta - phi)`` on [0, pi], strictly (> tol) somewhere."""
    v = _periodic_samples(v)
    m = _half_index(eta, len(v))
    diff, inside = _geo4_table(v)
    d = diff[m][inside[m]]
    return bool(np.all(d >= -tol) and np.any(d > tol))


def geo4_points(v, tol: float = 0.0) -> np.ndarray:
    """All lattice half-angles at which :func:`check_geo4` holds."""
    v = _periodic_samples(v)
    diff, inside = _geo4_table(v)
    lo = np.where(inside, diff, np.inf).min(axis=1)
    hi = np.where(inside, diff, -np.inf).max(axis=1)
    return np.flatnonzero((lo >= -tol) & (hi > tol)) * math.pi / len(v)


def lemma1_conclusion(v, tol: float = 0.0) -> bool:
    """Check: an even v satisfying the one-sided reflection inequality at some
    lattice point has no reflection points besides 0 and pi.

    Returns the truth value of that implication (vacuously True when no
    lattice point satisfies the hypothesis).
    """
    v = _periodic_samples(v)
    n = len(v)
    if _symmetry_defects(v)[0] > tol:
        raise ValueError("v must be even about 0 within tol")
    if len(geo4_points(v, tol)) == 0:
        return True
    k = np.flatnonzero(_symmetry_defects(v) <= tol)
    return bool(np.all((k == 0) | (k == n)))


# ---------------------------------------------------------------------------
# foliated Schwarz symmetry

@lru_cache(maxsize=1024)
def _signed_offsets(ntheta: int, k: int) -> np.ndarray:
    """Angular offset of every column from axis e_k, in half-steps, in (-n, n]."""
    d = (2 * np.arange(ntheta) - k) % (2 * ntheta)
    s = np.where(d <= ntheta, d, d - 2 * ntheta)
    s.setflags(write=False)
    return s


@lru_cache(maxsize=1024)
def _enumeration(ntheta: int, k: int) -> np.ndarray:
    """Columns by increasing distance to the axis, +theta before -theta."""
    s = _signed_offsets(ntheta, k)
    return np.lexsort((s < 0, np.abs(s)))


@lru_cache(maxsize=1024)
def _upper_path(ntheta: int, k: int) -> np.ndarray:
    """Columns with theta in [0, pi] on the + side, ordered by theta."""
    s = _signed_offsets(ntheta, k)
    cols = np.flatnonzero(s >= 0)
    return cols[np.argsort(s[cols], kind="stable")]


def fss_symmetrize(field: Field, p: Direction) -> Field:
    """Discrete foliated Schwarz rearrangement about axis ``p``.

    Each ring's values are sorted decreasingly and laid out along the columns
    ordered by distance to ``p`` (ties: +theta first).
    """
    n = field.grid.ntheta
    order = _enumeration(n, p.require_index(n))
    out = np.empty_like(field.values)
    out[:, order] = -np.sort(-field.values, axis=1)
    return field.with_values(out)


@dataclass(frozen=True)
class FssReport:
    axis: Direction
    axial_deficit: float
    mono_deficit: float
    tol: float

    @property
    def verdict(self) -> bool:
        return self.axial_deficit <= self.tol and self.mono_deficit <= self.tol


def fss_deficit(field: Field, p: Direction, tol: float = 0.0) -> FssReport:
    """Distance from axial symmetry about ``Rp`` and from monotone decay in theta.

    ``axial_deficit`` is ``max |u(phi_p + theta) - u(phi_p - theta)|``;
    ``mono_deficit`` is the largest rise ``u(theta2) - u(theta1)``,
    ``theta1 < theta2``, along the + side of any ring.
    """
    n = field.grid.ntheta
    k = p.require_index(n)
    u = field.values
    mirror = (k - np.arange(n)) % n
    axial = float(np.max(np.abs(u - u[:, mirror])))
    path = u[:, _upper_path(n, k)]
    rise = path - np.minimum.accumulate(path, axis=1)
    return FssReport(Direction.from_index(k, n), axial, float(rise.max()), tol)


# ---------------------------------------------------------------------------
# axis detection and the rotating plane

@dataclass(frozen=True, eq=False)
class AxisDetection:
    """Outcome of :func:`detect_axis`.

    ``axis`` is None when the antipodal cover fails, and also for radial sets
    (``radial=True``), where every axis works.
    """

    axis: Direction | None
    radial: bool
    antipodal_cover: bool
    arc: tuple[int, int] | None
    reports: tuple
    certified: bool
    diagnostics: str = ""

    @property
    def found(self) -> bool:
        return self.radial or self.axis is not None


def _largest_arc(M: DirectionSet) -> tuple[int, int]:
    n2 = M.size

    def smallest_member(arc):
        s, length = arc
        return min((s + i) % n2 for i in range(length))

    return min(M.arcs, key=lambda a: (-a[1], smallest_member(a)))


def detect_axis(M: DirectionSet, fields, tol: float | None = None) -> AxisDetection:
    """Candidate foliated-Schwarz axis from the dominance set ``M``.

    Requires every direction or its antipode in ``M``.  The axis is the
    midpoint of the largest arc (rounded down to the lattice; ties go to the
    arc holding the smallest lattice index) and is certified with
    :func:`fss_deficit` on every field.
    """
    fields = _as_fields(fields)
    tol = M.tol if tol is None else tol
    n = M.ntheta
    if not M.antipodal_cover():
        bad = M.uncovered()
        return AxisDetection(
            None, False, False, None, (), False,
            f"neither e nor -e dominant for lattice indices {bad.tolist()}",
        )
    if M.is_full:
        reports = tuple(fss_deficit(f, Direction.from_index(0, n), tol) for f in fields)
        return AxisDetection(None, True, True, (0, M.size), reports,
                             all(r.verdict for r in reports), "full lattice: radial")
    arc = _largest_arc(M)
    k = (arc[0] + (arc[1] - 1) // 2) % M.size
    p = Direction.from_index(k, n)
    reports = tuple(fss_deficit(f, p, tol) for f in fields)
    certified = all(r.verdict for r in reports)
    diag = "" if certified else "fss deficits exceed tol for some field"
    return AxisDetection(p, False, True, arc, reports, certified, diag)


@dataclass(frozen=True)
class SweepResult:
    theta1: float
    theta2: float
    upper: ReflectionReport
    lower: ReflectionReport
    full: bool
    M: DirectionSet

    @property
    def span(self) -> float:
        return self.theta1 - self.theta2

    @property
    def boundaries_symmetric(self) -> bool:
        return self.upper.classification == SYMMETRIC and self.lower.classification == SYMMETRIC


def rotating_plane_sweep(fields, e_start: Direction, tol: float | None = None) -> SweepResult:
    """Rotate the reflection plane both ways from ``e_start`` while dominance persists.

    ``theta1 >= 0 >= theta2`` are the largest rotations keeping every
    intermediate lattice direction in the dominance set; the reports at the
    two last directions are returned for inspection (they should be
    symmetric).  A span of 2 pi means every direction is a member.
    """
    fields = _as_fields(fields)
    tol = default_tol(fields) if tol is None else tol
    n = fields[0].grid.ntheta
    k0 = e_start.require_index(n)
    M = compute_M(fields, tol)
    if k0 not in M:
        raise ValueError(
            f"e_start ({e_start.degrees:.3f} deg) is not in the dominance set: "
            f"{M.reports[k0].classification}"
        )
    h = math.pi / n
    if M.is_full:
        anti = M.reports[(k0 + n) % (2 * n)]
        return SweepResult(math.pi, -math.pi, anti, anti, True, M)
    up = 0
    while (k0 + up + 1) in M:
        up += 1
    down = 0
    while (k0 - down - 1) in M:
        down += 1
    size = M.size
    return SweepResult(up * h, -down * h, M.reports[(k0 + up) % size],
                       M.reports[(k0 - down) % size], False, M)
