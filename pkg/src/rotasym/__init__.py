"""Polar-grid reaction-diffusion solver with reflection-symmetry diagnostics.

The package integrates ``u_t = Laplace(u) + f(t, |x|, u)`` with Dirichlet data on
a disk or annulus and measures, along the way, which reflections dominate the
solution and whether its late-time states are foliated Schwarz symmetric
(axially symmetric about some direction ``p`` and nonincreasing in the polar
angle away from ``p``).
"""

from .bessel import bessel_j, bessel_zero, disk_eigenvalue
from .geometry import *  # noqa: F401,F403
from .geometry import __all__ as _geometry_all
from .omega import OmegaEstimate, collect_omega, dist_to_estimate, sup_distance
from .solver import *  # noqa: F401,F403
from .solver import __all__ as _solver_all
from .symmetry import *  # noqa: F401,F403
from .symmetry import __all__ as _symmetry_all

__version__ = "0.1.0"

__all__ = (
    ["bessel_j", "bessel_zero", "disk_eigenvalue",
     "OmegaEstimate", "collect_omega", "dist_to_estimate", "sup_distance"]
    + list(_geometry_all) + list(_solver_all) + list(_symmetry_all)
)
