"""
Finite approximations of the omega limit set from late-time snapshots.

The estimate is an epsilon-net: snapshots in the late window are scanned in
time order and kept as representatives unless they lie within ``tol`` (sup
norm) of one already kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Field, GridError
from .solver import Trajectory

__all__ = ["OmegaEstimate", "collect_omega", "dist_to_estimate", "sup_distance",
           "DEFAULT_WINDOW", "DEFAULT_TOL", "MIN_SNAPSHOTS"]

DEFAULT_WINDOW = 0.2
DEFAULT_TOL = 1e-3
MIN_SNAPSHOTS = 5


def sup_distance(a: Field, b: Field) -> float:
    if a.grid != b.grid:
        raise GridError("fields live on different grids")
    return float(np.max(np.abs(a.values - b.values)))


@dataclass(frozen=True, eq=False)
class OmegaEstimate:
    window: tuple[float, float]
    snapshots: tuple
    distances: np.ndarray
    representatives: tuple
    tol: float

    @property
    def diameter(self) -> float:
        return float(self.distances.max()) if self.distances.size else 0.0

    def __len__(self):
        return len(self.representatives)


def collect_omega(traj: Trajectory, window_fraction: float = DEFAULT_WINDOW,
                  tol: float = DEFAULT_TOL, min_snapshots: int = MIN_SNAPSHOTS) -> OmegaEstimate:
    """Deduplicate the snapshots of the final ``window_fraction`` of the run.

    The window is widened backwards if it holds fewer than ``min_snapshots``
    snapshots (as far as the trajectory allows).
    """
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must be in (0, 1]")
    snaps = list(traj.snapshots)
    if not snaps:
        raise ValueError("empty window: trajectory has no snapshots")
    t0, t1 = snaps[0].t, snaps[-1].t
    t_lo = t1 - window_fraction * (t1 - t0)
    eps = 1e-12 * max(abs(t1), 1.0)
    window = [s for s in snaps if s.t >= t_lo - eps]
    if len(window) < min_snapshots:
        window = snaps[-min(min_snapshots, len(snaps)):]
    if not window:
        raise ValueError("empty window")

    stack = np.stack([s.values for s in window])
    k = len(window)
    dist = np.zeros((k, k))
    for i in range(k):
        dist[i, i + 1:] = np.max(np.abs(stack[i + 1:] - stack[i]), axis=(1, 2))
    dist = dist + dist.T

    reps: list[int] = []
    for i in range(k):
        if all(dist[i, j] > tol for j in reps):
            reps.append(i)
    return OmegaEstimate((window[0].t, window[-1].t), tuple(window), dist,
                         tuple(window[i] for i in reps), tol)


def dist_to_estimate(field: Field, est: OmegaEstimate) -> float:
    """Sup-distance from ``field`` to the nearest representative."""
    return min(sup_distance(field, r) for r in est.representatives)
