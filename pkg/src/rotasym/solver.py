"""
Time integration of ``u_t = Lap u + f(t, |x|, u)`` with u = 0 on the boundary.

Two schemes are available:

``imex_fourier``
    Real DFT in phi on every ring; each angular mode then needs one
    tridiagonal radial solve (Thomas algorithm, factorised once per time
    step size).  Diffusion is Crank-Nicolson; the reaction is explicit,
    either IMEX Euler (``order=1``) or an explicit midpoint evaluation fed by
    a backward-Euler half step (``order=2``).
``backward_euler``
    Implicit diffusion, explicit reaction.  The linear system is solved by
    preconditioned conjugate gradients on the r-weighted (symmetric)
    form of the operator.

Both discretise the same five-point polar stencil, see :func:`laplacian_apply`.

By default each step is evaluated in a canonical frame of the dihedral group
of grid rotations and lattice reflections (see :func:`_canonical_frame`).
This makes the discrete flow bit-for-bit equivariant under those symmetries,
which the floating-point DFT and CG on their own are not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bessel import bessel_j, bessel_zero
from .geometry import Field, GridError, PolarGrid, RadialDomain

__all__ = [
    "Nonlinearity",
    "Scheme",
    "Trajectory",
    "EquilibriumResult",
    "SolverError",
    "BlowUpError",
    "LinearSolveError",
    "PRESETS",
    "make_nonlinearity",
    "linear",
    "cubic",
    "eigen_pump",
    "radial_weighted",
    "periodic",
    "laplacian_apply",
    "step",
    "integrate",
    "equilibrium_residual",
    "equilibrium_solve",
    "eigenpair_oracle",
]

DEFAULT_BLOWUP_GUARD = 1e6


class SolverError(RuntimeError):
    """A time step could not be completed."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class BlowUpError(SolverError):
    """Sup-norm exceeded the blow-up guard (uniform boundedness violated)."""

    def __init__(self, message, t=None, trajectory=None):
        super().__init__(message, t)
        self.trajectory = trajectory


class LinearSolveError(SolverError):
    def __init__(self, message, t=None, residual=None):
        super().__init__(message, t)
        self.residual = residual


# ---------------------------------------------------------------------------
# nonlinearities

@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Reaction term ``f(t, r, u)`` with its u-derivative.

    ``lipschitz(K)`` bounds the Lipschitz constant of ``f`` in ``u`` on
    ``|u| <= K`` uniformly in ``t`` and ``r`` (for ``r <= r_max``).
    """

    name: str
    params: dict
    func: Callable
    dfdu: Callable
    autonomous: bool = True
    lipschitz: Callable[[float], float] | None = None

    def __call__(self, t, r, u):
        return self.func(t, r, u)

    def derivative(self, t, r, u):
        return self.dfdu(t, r, u)


def _lambda2(lam):
    return bessel_zero(1, 1) ** 2 if lam is None else float(lam)


def linear(c: float = 0.0) -> Nonlinearity:
    """f = c u (c = 0 is the heat equation); Lipschitz bound |c|."""
    c = float(c)
    return Nonlinearity(
        "linear", {"c": c},
        lambda t, r, u: c * u,
        lambda t, r, u: np.full_like(np.asarray(u, float), c),
        lipschitz=lambda K: abs(c),
    )


def cubic(a: float = 1.0, b: float = 1.0) -> Nonlinearity:
    """f = a u - b u^3; Lipschitz bound |a| + 3|b| K^2."""
    a, b = float(a), float(b)
    return Nonlinearity(
        "cubic", {"a": a, "b": b},
        lambda t, r, u: a * u - b * (u * u * u),
        lambda t, r, u: a - 3 * b * (u * u),
        lipschitz=lambda K: abs(a) + 3 * abs(b) * K**2,
    )


def eigen_pump(lam: float | None = None) -> Nonlinearity:
    """f = lam u - u^3 with lam defaulting to the unit disk's second eigenvalue."""
    lam = _lambda2(lam)
    nl = cubic(lam, 1.0)
    return replace(nl, name="eigen_pump", params={"lam": lam})


def radial_weighted(d: float = 1.0) -> Nonlinearity:
    """f = u - u^3 + d r u (increasing in r for d > 0); Lipschitz 1 + 3K^2 + |d| r_max."""
    d = float(d)
    return Nonlinearity(
        "radial_weighted", {"d": d},
        lambda t, r, u: u - u * u * u + d * r * u,
        lambda t, r, u: 1 - 3 * u**2 + d * r,
        lipschitz=lambda K, r_max=1.0: 1 + 3 * K**2 + abs(d) * r_max,
    )


def periodic(eps: float = 0.1, period: float = 0.5, lam: float | None = None) -> Nonlinearity:
    """f = lam u - u^3 + eps sin(2 pi t / period) u; Lipschitz lam + |eps| + 3K^2."""
    eps, period, lam = float(eps), float(period), _lambda2(lam)
    if period <= 0:
        raise ValueError("period must be positive")
    w = 2 * math.pi / period

    return Nonlinearity(
        "periodic", {"eps": eps, "period": period, "lam": lam},
        lambda t, r, u: (lam + eps * math.sin(w * t)) * u - u * u * u,
        lambda t, r, u: lam + eps * math.sin(w * t) - 3 * u**2,
        autonomous=False,
        lipschitz=lambda K: abs(lam) + abs(eps) + 3 * K**2,
    )


PRESETS = {
    "linear": linear,
    "heat": lambda: linear(0.0),
    "cubic": cubic,
    "eigen_pump": eigen_pump,
    "radial_weighted": radial_weighted,
    "periodic": periodic,
}


def make_nonlinearity(name: str, **params) -> Nonlinearity:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown nonlinearity preset {name!r}; known: {sorted(PRESETS)}") from None
    return factory(**params)


# ---------------------------------------------------------------------------
# schemes and trajectories

@dataclass(frozen=True)
class Scheme:
    kind: str = "imex_fourier"
    dt: float = 1e-3
    order: int = 2
    rtol: float = 1e-12
    maxiter: int = 20000
    exact_symmetry: bool = True

    def __post_init__(self):
        if self.kind not in ("imex_fourier", "backward_euler"):
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")


@dataclass(frozen=True, eq=False)
class Trajectory:
    snapshots: tuple
    sup_times: np.ndarray
    sup_norms: np.ndarray
    steps: int = 0
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "snapshots", tuple(self.snapshots))
        times = [s.t for s in self.snapshots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot times must be strictly increasing")
        if self.snapshots and any(s.grid != self.snapshots[0].grid for s in self.snapshots):
            raise ValueError("all snapshots must share one grid")

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def grid(self) -> PolarGrid:
        return self.snapshots[0].grid

    @property
    def max_sup_norm(self) -> float:
        return float(np.max(self.sup_norms)) if len(self.sup_norms) else 0.0

    def __len__(self):
        return len(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]


# ---------------------------------------------------------------------------
# the polar five-point Laplacian

def _radial_weights(grid: PolarGrid):
    r, dr = grid.r, grid.dr
    lower = (r - 0.5 * dr) / (r * dr * dr)
    upper = (r + 0.5 * dr) / (r * dr * dr)
    return lower, upper


def _laplacian_values(grid: PolarGrid, u: np.ndarray) -> np.ndarray:
    lower, upper = _radial_weights(grid)
    n = grid.ntheta
    if grid.domain.kind == "disk":
        # pass-through-origin ghost; its weight r_{-1/2} vanishes on this grid
        inner = np.roll(u[0], n // 2)
    else:
        inner = -u[0]
    um = np.vstack([inner[None, :], u[:-1]])
    up = np.vstack([u[1:], -u[-1:]])
    radial = upper[:, None] * (up - u) - lower[:, None] * (u - um)
    angular = (np.roll(u, 1, axis=1) - 2 * u + np.roll(u, -1, axis=1)) / (
        grid.r[:, None] ** 2 * grid.dphi**2
    )
    return radial + angular


def laplacian_apply(field: Field) -> Field:
    """Second-order polar Laplacian with Dirichlet ghost cells ``-u`` outside.

    Radial part in flux form ``(1/r)(r u_r)_r``, which coincides with central
    differences of ``u_rr + u_r / r``; angular part periodic.
    """
    return field.with_values(_laplacian_values(field.grid, field.values))


@lru_cache(maxsize=64)
def _mode_operator(grid: PolarGrid):
    """Tridiagonal radial operators for every real-DFT mode.

    Returns ``(sub, diag, sup)`` with ``diag`` of shape ``(nr, nmodes)``.
    """
    lower, upper = _radial_weights(grid)
    n = grid.ntheta
    m = np.arange(n // 2 + 1)
    mu = (2 * np.sin(m * grid.dphi / 2) / grid.dphi) ** 2
    diag = -(lower + upper)[:, None] - mu[None, :] / grid.r[:, None] ** 2
    diag[-1] -= upper[-1]
    if grid.domain.kind == "disk":
        diag[0] += lower[0] * (-1.0) ** m
    else:
        diag[0] -= lower[0]
    sub = lower.copy()
    sub[0] = 0.0
    sup = upper.copy()
    sup[-1] = 0.0
    return sub, diag, sup


@lru_cache(maxsize=64)
def _mode_factors(grid: PolarGrid, c: float):
    """Thomas factorisation of ``I - c A_m`` for all modes at once."""
    sub, diag, sup = _mode_operator(grid)
    a = -c * sub
    b = 1.0 - c * diag
    cc = -c * sup
    nr = grid.nr
    denom = np.empty_like(b)
    cprime = np.empty_like(b)
    denom[0] = b[0]
    cprime[0] = cc[0] / denom[0]
    for i in range(1, nr):
        denom[i] = b[i] - a[i] * cprime[i - 1]
        cprime[i] = cc[i] / denom[i]
    return a, denom, cprime


def _thomas(factors, rhs: np.ndarray) -> np.ndarray:
    a, denom, cprime = factors
    y = np.empty_like(rhs)
    y[0] = rhs[0] / denom[0]
    for i in range(1, rhs.shape[0]):
        y[i] = (rhs[i] - a[i] * y[i - 1]) / denom[i]
    for i in range(rhs.shape[0] - 2, -1, -1):
        y[i] -= cprime[i] * y[i + 1]
    return y


def _mode_apply(grid: PolarGrid, uh: np.ndarray) -> np.ndarray:
    sub, diag, sup = _mode_operator(grid)
    out = diag * uh
    out[1:] += sub[1:, None] * uh[:-1]
    out[:-1] += sup[:-1, None] * uh[1:]
    return out


@lru_cache(maxsize=16)
def _sparse_operator(grid: PolarGrid):
    """Sparse Laplacian matrix (row-major cell ordering) and the r-weights."""
    nr, n = grid.shape
    lower, upper = _radial_weights(grid)
    idx = np.arange(nr * n).reshape(nr, n)
    rows, cols, vals = [], [], []

    def add(i_rows, i_cols, v):
        rows.append(i_rows.ravel())
        cols.append(i_cols.ravel())
        vals.append(np.broadcast_to(v, i_rows.shape).ravel())

    ang = 1.0 / (grid.r[:, None] ** 2 * grid.dphi**2) * np.ones((1, n))
    diag = -(lower + upper)[:, None] - 2 * ang
    diag[-1] -= upper[-1]
    if grid.domain.kind == "annulus":
        diag[0] -= lower[0]
    add(idx, idx, diag)
    add(idx, np.roll(idx, 1, axis=1), ang)
    add(idx, np.roll(idx, -1, axis=1), ang)
    add(idx[1:], idx[:-1], np.repeat(lower[1:, None], n, axis=1))
    add(idx[:-1], idx[1:], np.repeat(upper[:-1, None], n, axis=1))
    if grid.domain.kind == "disk" and lower[0] != 0.0:
        add(idx[0], np.roll(idx[0], n // 2), np.full(n, lower[0]))
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nr * n, nr * n),
    )
    weights = np.repeat(grid.r, n)
    return A, weights


@lru_cache(maxsize=16)
def _backward_euler_system(grid: PolarGrid, dt: float):
    A, w = _sparse_operator(grid)
    ident = sp.identity(A.shape[0], format="csr")
    M = (ident - dt * A).tocsr()
    Mw = sp.diags(w) @ M
    precond = sp.diags(1.0 / Mw.diagonal())
    return M, Mw.tocsr(), w, precond


# ---------------------------------------------------------------------------
# core steps on raw arrays

def _fourier_core(grid, u, t, nl, scheme, dt):
    n = grid.ntheta
    R = grid.r[:, None]
    uh = np.fft.rfft(u, axis=1)
    f0 = nl(t, R, u)
    if scheme.order == 2:
        half = _mode_factors(grid, 0.5 * dt)
        star = np.fft.irfft(_thomas(half, uh + 0.5 * dt * np.fft.rfft(f0, axis=1)), n, axis=1)
        fr = nl(t + 0.5 * dt, R, star)
    else:
        fr = f0
    rhs = uh + 0.5 * dt * _mode_apply(grid, uh) + dt * np.fft.rfft(fr, axis=1)
    return np.fft.irfft(_thomas(_mode_factors(grid, 0.5 * dt), rhs), n, axis=1)


def _backward_euler_core(grid, u, t, nl, scheme, dt):
    M, Mw, w, precond = _backward_euler_system(grid, dt)
    rhs = (u + dt * nl(t, grid.r[:, None], u)).ravel()
    x, info = spla.cg(Mw, w * rhs, x0=u.ravel(), rtol=scheme.rtol, atol=0.0,
                      maxiter=scheme.maxiter, M=precond)
    resid = float(np.max(np.abs(M @ x - rhs)))
    scale = max(float(np.max(np.abs(rhs))), 1e-300)
    if info != 0 and resid > 100 * scheme.rtol * scale:
        raise LinearSolveError(
            f"CG did not converge at t={t + dt}: residual {resid:.3e}", t + dt, resid
        )
    return x.reshape(grid.shape)


@lru_cache(maxsize=16)
def _dihedral_perms(n: int) -> np.ndarray:
    """All 2n angular index maps of grid rotations and lattice reflections."""
    j = np.arange(n)
    s = np.arange(n)[:, None]
    return np.vstack([(j - s) % n, (s - j) % n])


def _canonical_frame(u: np.ndarray):
    """Pick a representative of the dihedral orbit of ``u``.

    Returns ``(L, back, rep)``: ``L = u[:, perm]`` is the byte-wise smallest
    image, ``back`` maps results back (``u == L[:, back]``), and ``rep`` sends
    each column to the smallest column in its orbit under the stabiliser of
    ``L`` (None if the stabiliser is trivial).
    """
    perms = _dihedral_perms(u.shape[1])
    # total order: lexicographic on the raw 64-bit patterns, ring by ring
    bits = np.ascontiguousarray(u).view(np.uint64)
    hits = np.arange(len(perms))
    for row in bits:
        keys = row[perms[hits]]
        if np.all(keys == keys[0]):
            continue
        first = np.lexsort(keys.T[::-1])[0]
        hits = hits[np.all(keys == keys[first], axis=1)]
        if len(hits) == 1:
            break
    g = int(hits[0])
    back = np.argsort(perms[g])
    rep = None
    if len(hits) > 1:
        stab = np.array([back[perms[h]] for h in hits])
        rep = stab.min(axis=0)
    return u[:, perms[g]], back, rep


def _step_values(grid, u, t, nl, scheme, dt):
    core = _fourier_core if scheme.kind == "imex_fourier" else _backward_euler_core
    if not scheme.exact_symmetry:
        return core(grid, u, t, nl, scheme, dt)
    L, back, rep = _canonical_frame(u)
    y = core(grid, L, t, nl, scheme, dt)
    if rep is not None:
        y = y[:, rep]
    return y[:, back]


def step(field: Field, nonlinearity: Nonlinearity, scheme: Scheme, dt: float | None = None) -> Field:
    """Advance ``field`` by one time step (``scheme.dt`` unless ``dt`` given)."""
    dt = scheme.dt if dt is None else dt
    with np.errstate(over="ignore", invalid="ignore"):
        new = _step_values(field.grid, field.values, field.t, nonlinearity, scheme, dt)
    if not np.all(np.isfinite(new)):
        raise SolverError(f"non-finite values produced at t={field.t + dt:.6g}", field.t + dt)
    return Field(field.grid, new, field.t + dt)


def integrate(grid: PolarGrid, u0: Field, nonlinearity: Nonlinearity, scheme: Scheme,
              t_end: float, snapshot_every: float | None = None,
              blowup_guard: float = DEFAULT_BLOWUP_GUARD) -> Trajectory:
    """Integrate from ``u0`` to ``t_end``, keeping snapshots every ``snapshot_every``.

    Snapshots at t=0 and t=t_end are always kept.  The sup-norm is recorded
    after every step; exceeding ``blowup_guard`` raises :class:`BlowUpError`
    carrying the partial trajectory.
    """
    if u0.grid != grid:
        raise GridError("initial field lives on a different grid")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    dt = scheme.dt
    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    t0 = u0.t
    every = snapshot_every if snapshot_every and snapshot_every > 0 else math.inf
    eps = 1e-9 * dt

    snaps = [u0]
    sup_t = [t0]
    sup_n = [u0.sup_norm()]
    next_snap = every
    u = u0
    for k in range(1, n_steps + 1):
        t_prev = t0 + (k - 1) * dt
        t_next = t0 + t_end if k == n_steps else t0 + k * dt
        try:
            u = step(u, nonlinearity, scheme, dt=t_next - t_prev)
        except SolverError as err:
            err.trajectory = Trajectory(snaps, np.array(sup_t), np.array(sup_n), k - 1,
                                        {"aborted": True})
            raise
        u = Field(grid, u.values, t_next)
        s = u.sup_norm()
        sup_t.append(t_next)
        sup_n.append(s)
        if s > blowup_guard:
            snaps.append(u)
            traj = Trajectory(snaps, np.array(sup_t), np.array(sup_n), k,
                              {"aborted": True, "u2_violated": True})
            raise BlowUpError(
                f"sup-norm {s:.3e} exceeded blow-up guard {blowup_guard:.1e} at t={t_next:.6g}",
                t_next, traj,
            )
        elapsed = t_next - t0
        if k == n_steps or elapsed >= next_snap - eps:
            snaps.append(u)
            while next_snap <= elapsed + eps:
                next_snap += every
    meta = {"nonlinearity": nonlinearity.name, "params": dict(nonlinearity.params),
            "scheme": scheme.kind, "dt": dt, "u2_violated": False}
    return Trajectory(snaps, np.array(sup_t), np.array(sup_n), n_steps, meta)


# ---------------------------------------------------------------------------
# equilibria

@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    field: Field
    residual: float
    converged: bool
    steps: int


def equilibrium_residual(field: Field, nonlinearity: Nonlinearity) -> float:
    """Sup-norm of ``Lap u + f(|x|, u)``."""
    res = _laplacian_values(field.grid, field.values) + nonlinearity(
        field.t, field.grid.r[:, None], field.values)
    return float(np.max(np.abs(res)))


def equilibrium_solve(grid: PolarGrid, u0: Field, nonlinearity: Nonlinearity, scheme: Scheme,
                      residual_tol: float = 1e-6, max_steps: int = 200_000,
                      check_every: int = 10,
                      blowup_guard: float = DEFAULT_BLOWUP_GUARD) -> EquilibriumResult:
    """March in time until the elliptic residual drops below ``residual_tol``.

    Gives up after ``max_steps`` and returns the best iterate seen with
    ``converged=False``.
    """
    if not nonlinearity.autonomous:
        raise ValueError("equilibrium_solve needs an autonomous nonlinearity")
    if u0.grid != grid:
        raise GridError("initial field lives on a different grid")
    u = Field(grid, u0.values, 0.0)
    best = u
    best_res = equilibrium_residual(u, nonlinearity)
    if best_res < residual_tol:
        return EquilibriumResult(u, best_res, True, 0)
    for k in range(1, max_steps + 1):
        u = step(u, nonlinearity, scheme)
        if u.sup_norm() > blowup_guard:
            raise BlowUpError(f"sup-norm exceeded blow-up guard at t={u.t:.6g}", u.t)
        if k % check_every == 0 or k == max_steps:
            res = equilibrium_residual(u, nonlinearity)
            if res < best_res:
                best, best_res = u, res
            if res < residual_tol:
                return EquilibriumResult(u, res, True, k)
    return EquilibriumResult(best, best_res, False, max_steps)


# ---------------------------------------------------------------------------
# eigenpair oracle

def eigenpair_oracle(grid: PolarGrid, m: int, k: int) -> tuple[float, Field]:
    """Dirichlet eigenpair ``(j_{m,k}/R)^2``, ``J_m(j_{m,k} r / R) cos(m phi)`` of a disk."""
    domain: RadialDomain = grid.domain
    if domain.kind != "disk":
        raise ValueError("the eigenpair oracle only covers disks")
    j = bessel_zero(m, k)
    R = domain.r_outer
    lam = (j / R) ** 2
    radial = bessel_j(m, j * grid.r / R)
    # signed angles in (-pi, pi] keep cos(m phi) exactly even on the grid
    n = grid.ntheta
    signed = 2 * math.pi * (((np.arange(n) + n // 2) % n) - n // 2) / n
    values = radial[:, None] * np.cos(m * signed)[None, :]
    return lam, Field(grid, values, 0.0)
