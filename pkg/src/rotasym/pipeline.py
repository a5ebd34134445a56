"""
Scenario runs: config -> trajectory -> omega estimate -> symmetry verdicts.

``run_scenario`` writes, under the output directory::

    metrics.csv      one row per snapshot (fixed column order, see METRIC_COLUMNS)
    summary.txt      verdicts as ``key = value`` lines (deterministic)
    timing.log       wall-clock and step counts (not deterministic)
    snapshots/       every snapshot as a field file
    heatmaps/        PGM renders of the initial, final and omega fields
"""

from __future__ import annotations

import csv
import io as _io
import math
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .geometry import Direction, Field, GridError, PolarGrid, RadialDomain, build_grid
from .io import ConfigError, KeyValues, format_keyvalues, read_keyvalues, render_pgm, write_field
from .omega import collect_omega, dist_to_estimate
from .solver import (
    PRESETS,
    Scheme,
    SolverError,
    Trajectory,
    eigenpair_oracle,
    integrate,
    make_nonlinearity,
)
from .symmetry import (
    check_U1,
    compute_M,
    detect_axis,
    fss_deficit,
    rotating_plane_sweep,
)

__all__ = [
    "METRIC_COLUMNS",
    "AnalysisParams",
    "ScenarioConfig",
    "RunSummary",
    "RunResult",
    "load_config",
    "config_from_keyvalues",
    "build_initial",
    "analyze_trajectory",
    "run_scenario",
    "INITIAL_TERMS",
    "metrics_csv",
    "trajectory_from_files",
    "analyze_files",
]

METRIC_COLUMNS = ("t", "sup_norm", "u1_holds", "m_arc_count", "largest_arc_deg", "axis_deg",
                  "axial_deficit", "mono_deficit", "dist_to_omega")


@dataclass(frozen=True)
class AnalysisParams:
    tol: float = 1e-3
    relative: bool = True
    window_fraction: float = 0.2
    min_snapshots: int = 5
    e_start_deg: float = 0.0

    def e_start(self, ntheta: int) -> Direction:
        e = Direction(math.radians(self.e_start_deg))
        if e.lattice_index(ntheta) is None:
            raise GridError(f"e_start {self.e_start_deg} deg is not on the half-angle lattice")
        return Direction.from_index(e.lattice_index(ntheta), ntheta)


@dataclass(frozen=True)
class ScenarioConfig:
    domain: RadialDomain
    nr: int
    ntheta: int
    scheme: Scheme
    nonlinearity: str
    nonlinearity_params: dict
    initial: tuple
    t_end: float
    snapshot_every: float | None
    analysis: AnalysisParams = AnalysisParams()
    out_dir: str = "out"
    emit_snapshots: bool = True
    emit_heatmaps: bool = True
    heatmap_size: int = 128
    blowup_guard: float = 1e6

    def grid(self) -> PolarGrid:
        return build_grid(self.domain, self.nr, self.ntheta)


# ---------------------------------------------------------------------------
# initial conditions

def _dirichlet_taper(grid: PolarGrid):
    r_in, R = grid.domain.r_inner, grid.domain.r_outer
    r = grid.r[:, None]
    if r_in == 0:
        return 1 - (r / R) ** 2
    return (r - r_in) * (R - r) / (0.5 * (R - r_in)) ** 2


def _ic_eigenfunction(grid, m=1, k=1, amplitude=1.0):
    return amplitude * eigenpair_oracle(grid, int(m), int(k))[1].values


def _ic_modes(grid, list="1:1:1.0", amplitude=1.0):
    out = np.zeros(grid.shape)
    for item in str(list).split(";"):
        m, k, a = item.split(":")
        out += float(a) * eigenpair_oracle(grid, int(m), int(k))[1].values
    return amplitude * out


def _ic_radial(grid, profile="gaussian", width=0.4, amplitude=1.0):
    R = grid.domain.r_outer
    r = grid.r[:, None] * np.ones((1, grid.ntheta))
    if profile == "gaussian":
        base = np.exp(-(r / (width * R)) ** 2)
    elif profile == "parabola":
        base = np.ones_like(r)
    elif profile == "bessel":
        if grid.domain.kind != "disk":
            raise ValueError("bessel profile needs a disk")
        return amplitude * eigenpair_oracle(grid, 0, 1)[1].values
    else:
        raise ValueError(f"unknown radial profile {profile!r}")
    return amplitude * base * _dirichlet_taper(grid)


def _ic_bump(grid, center_deg=0.0, radius=None, width=0.25, amplitude=1.0):
    R = grid.domain.r_outer
    rc = 0.5 * (grid.domain.r_inner + R) if radius is None else float(radius)
    a = math.radians(float(center_deg))
    X, Y = grid.cartesian()
    d2 = (X - rc * math.cos(a)) ** 2 + (Y - rc * math.sin(a)) ** 2
    return amplitude * np.exp(-d2 / (width * R) ** 2) * _dirichlet_taper(grid)


INITIAL_TERMS = {
    "eigenfunction": (_ic_eigenfunction, {"m": int, "k": int, "amplitude": float}),
    "modes": (_ic_modes, {"list": str, "amplitude": float}),
    "radial": (_ic_radial, {"profile": str, "width": float, "amplitude": float}),
    "bump": (_ic_bump, {"center_deg": float, "radius": float, "width": float, "amplitude": float}),
}


def build_initial(grid: PolarGrid, terms) -> Field:
    """Sum of initial-condition terms ``[(kind, params), ...]``."""
    values = np.zeros(grid.shape)
    for kind, params in terms:
        func = INITIAL_TERMS[kind][0]
        values = values + func(grid, **params)
    return Field(grid, values, 0.0)


# ---------------------------------------------------------------------------
# config

_KNOWN_KEYS = {
    "domain.kind", "domain.r_inner", "domain.r_outer", "grid.nr", "grid.ntheta",
    "scheme.kind", "scheme.dt", "scheme.order", "scheme.rtol", "scheme.maxiter",
    "scheme.exact_symmetry", "nonlinearity.id", "initial.terms", "time.t_end",
    "time.snapshot_every", "analysis.tol", "analysis.tol_mode", "analysis.window_fraction",
    "analysis.min_snapshots", "analysis.e_start_deg", "output.dir", "output.snapshots",
    "output.heatmaps", "output.heatmap_size", "solver.blowup_guard",
}


def config_from_keyvalues(kv: KeyValues) -> ScenarioConfig:
    kind = kv.get_str("domain.kind", "disk", choices={"disk", "annulus"})
    r_in = kv.get_float("domain.r_inner", 0.0)
    r_out = kv.get_float("domain.r_outer", 1.0)
    if kind == "disk" and r_in != 0:
        raise kv.error("domain.r_inner", "must be 0 for a disk")
    if kind == "annulus" and r_in <= 0:
        raise kv.error("domain.r_inner", "must be > 0 for an annulus")
    try:
        domain = RadialDomain(r_in, r_out)
    except GridError as err:
        raise kv.error("domain.r_outer", str(err)) from None

    nr = kv.get_int("grid.nr")
    ntheta = kv.get_int("grid.ntheta")
    if nr < 4:
        raise kv.error("grid.nr", f"must be >= 4 (got {nr})")
    if ntheta < 8:
        raise kv.error("grid.ntheta", f"must be >= 8 (got {ntheta})")
    if ntheta % 2:
        raise kv.error("grid.ntheta", f"must be even (got {ntheta})")

    dt = kv.get_float("scheme.dt", 1e-3)
    if dt <= 0:
        raise kv.error("scheme.dt", f"must be > 0 (got {dt})")
    order = kv.get_int("scheme.order", 2)
    if order not in (1, 2):
        raise kv.error("scheme.order", "must be 1 or 2")
    scheme = Scheme(
        kind=kv.get_str("scheme.kind", "imex_fourier", choices={"imex_fourier", "backward_euler"}),
        dt=dt, order=order,
        rtol=kv.get_float("scheme.rtol", 1e-12),
        maxiter=kv.get_int("scheme.maxiter", 20000),
        exact_symmetry=kv.get_bool("scheme.exact_symmetry", True),
    )

    nl_id = kv.get_str("nonlinearity.id", choices=set(PRESETS))
    nl_params = {}
    for name, key in kv.section("nonlinearity").items():
        if name == "id":
            continue
        nl_params[name] = kv.get_float(key)
    try:
        make_nonlinearity(nl_id, **nl_params)
    except TypeError as err:
        raise kv.error("nonlinearity.id", f"bad parameters: {err}") from None
    except ValueError as err:
        raise kv.error("nonlinearity.id", str(err)) from None

    terms = []
    names = [s.strip() for s in kv.get_str("initial.terms").split(",") if s.strip()]
    if not names:
        raise kv.error("initial.terms", "no initial-condition terms given")
    for name in names:
        if name not in INITIAL_TERMS:
            raise kv.error("initial.terms", f"unknown term {name!r}; known: {sorted(INITIAL_TERMS)}")
        _, schema = INITIAL_TERMS[name]
        params = {}
        for pname, key in kv.section(f"initial.{name}").items():
            if pname not in schema:
                raise kv.error(key, f"unknown parameter for {name}; known: {sorted(schema)}")
            conv = schema[pname]
            params[pname] = (kv.get_str(key) if conv is str
                             else kv.get_int(key) if conv is int else kv.get_float(key))
        if name in ("eigenfunction", "modes") and kind != "disk":
            raise kv.error("initial.terms", f"term {name!r} needs a disk domain")
        terms.append((name, params))

    t_end = kv.get_float("time.t_end")
    if t_end <= 0:
        raise kv.error("time.t_end", "must be > 0")
    every = kv.get_float("time.snapshot_every", 0.0) or None
    if every is not None and every < 0:
        raise kv.error("time.snapshot_every", "must be >= 0")

    analysis = AnalysisParams(
        tol=kv.get_float("analysis.tol", 1e-3),
        relative=kv.get_str("analysis.tol_mode", "relative",
                            choices={"relative", "absolute"}) == "relative",
        window_fraction=kv.get_float("analysis.window_fraction", 0.2),
        min_snapshots=kv.get_int("analysis.min_snapshots", 5),
        e_start_deg=kv.get_float("analysis.e_start_deg", 0.0),
    )
    if analysis.tol < 0:
        raise kv.error("analysis.tol", "must be >= 0")
    if not 0 < analysis.window_fraction <= 1:
        raise kv.error("analysis.window_fraction", "must be in (0, 1]")
    try:
        analysis.e_start(ntheta)
    except GridError as err:
        raise kv.error("analysis.e_start_deg", str(err)) from None

    cfg = ScenarioConfig(
        domain=domain, nr=nr, ntheta=ntheta, scheme=scheme,
        nonlinearity=nl_id, nonlinearity_params=nl_params, initial=tuple(terms),
        t_end=t_end, snapshot_every=every, analysis=analysis,
        out_dir=kv.get_str("output.dir", "out"),
        emit_snapshots=kv.get_bool("output.snapshots", True),
        emit_heatmaps=kv.get_bool("output.heatmaps", True),
        heatmap_size=kv.get_int("output.heatmap_size", 128),
        blowup_guard=kv.get_float("solver.blowup_guard", 1e6),
    )
    for key in kv.values:
        if key in _KNOWN_KEYS or key.startswith(("nonlinearity.", "initial.")):
            continue
        raise kv.error(key, "unknown key")
    return cfg


def load_config(path) -> ScenarioConfig:
    return config_from_keyvalues(read_keyvalues(path))


# ---------------------------------------------------------------------------
# analysis

@dataclass(frozen=True, eq=False)
class RunSummary:
    status: str
    e_start_deg: float
    u1_holds: bool
    tol: float
    max_sup_norm: float
    t_final: float
    steps: int
    snapshots: int
    omega_window: tuple
    omega_representatives: int
    omega_diameter: float
    m_arcs: tuple
    m_full: bool
    antipodal_cover: bool
    axis: str
    fss_certified: bool
    fss_reports: tuple
    sweep: dict
    message: str = ""
    extra: dict = dc_field(default_factory=dict)

    def items(self):
        yield "status", self.status
        if self.message:
            yield "message", self.message
        yield "u1.e_start_deg", float(self.e_start_deg)
        yield "u1.holds", self.u1_holds
        yield "tol", float(self.tol)
        yield "u2.max_sup_norm", float(self.max_sup_norm)
        yield "t_final", float(self.t_final)
        yield "steps", self.steps
        yield "snapshots", self.snapshots
        yield "omega.t_lo", float(self.omega_window[0])
        yield "omega.t_hi", float(self.omega_window[1])
        yield "omega.representatives", self.omega_representatives
        yield "omega.diameter", float(self.omega_diameter)
        yield "m.full", self.m_full
        yield "m.arc_count", len(self.m_arcs)
        yield "m.arcs_deg", "; ".join(f"{a!r}:{b!r}" for a, b in self.m_arcs) or "none"
        yield "m.antipodal_cover", self.antipodal_cover
        yield "axis", self.axis
        yield "fss.certified", self.fss_certified
        for i, (t, ax, mono) in enumerate(self.fss_reports):
            yield f"fss.rep{i}.t", float(t)
            yield f"fss.rep{i}.axial_deficit", float(ax)
            yield f"fss.rep{i}.mono_deficit", float(mono)
        for k, v in self.sweep.items():
            yield f"sweep.{k}", v
        for k, v in self.extra.items():
            yield k, v

    def to_text(self) -> str:
        return format_keyvalues(self.items(), header="# rotasym run summary")


def _axis_label(det) -> str:
    if det.radial:
        return "radial"
    if det.axis is None:
        return "none"
    return repr(det.axis.degrees)


def analyze_trajectory(traj: Trajectory, params: AnalysisParams = AnalysisParams()):
    """Symmetry pipeline on a trajectory; returns ``(summary, metric_rows, omega)``."""
    grid = traj.grid
    n = grid.ntheta
    e_start = params.e_start(n)
    scale = max(s.sup_norm() for s in traj.snapshots) if params.relative else 1.0
    tol = params.tol * scale

    est = collect_omega(traj, params.window_fraction, tol, params.min_snapshots)
    reps = list(est.representatives)
    M = compute_M(reps, tol)
    det = detect_axis(M, reps, tol)
    u1 = check_U1(traj.snapshots[0], e_start, tol)

    try:
        sw = rotating_plane_sweep(reps, e_start, tol)
        sweep = {
            "theta1_deg": math.degrees(sw.theta1), "theta2_deg": math.degrees(sw.theta2),
            "span_deg": math.degrees(sw.span), "full": sw.full,
            "boundaries_symmetric": sw.boundaries_symmetric,
        }
    except ValueError as err:
        sweep = {"error": str(err)}

    h = 180.0 / n
    arcs = () if M.is_full else tuple((s * h, (s + length - 1) * h % 360.0) for s, length in M.arcs)
    fss = tuple((r_field.t, rep.axial_deficit, rep.mono_deficit)
                for r_field, rep in zip(reps, det.reports))
    summary = RunSummary(
        status="ok", e_start_deg=e_start.degrees, u1_holds=u1, tol=tol,
        max_sup_norm=float(max(np.max(traj.sup_norms), max(s.sup_norm() for s in traj.snapshots))),
        t_final=traj.snapshots[-1].t, steps=traj.steps, snapshots=len(traj),
        omega_window=est.window, omega_representatives=len(reps), omega_diameter=est.diameter,
        m_arcs=arcs, m_full=M.is_full, antipodal_cover=det.antipodal_cover, axis=_axis_label(det),
        fss_certified=det.certified, fss_reports=fss, sweep=sweep,
    )

    p = det.axis if det.axis is not None else e_start
    rows = []
    for s in traj.snapshots:
        Ms = compute_M(s, tol)
        ds = detect_axis(Ms, s, tol)
        largest = max((length for _, length in Ms.arcs), default=0)
        largest_deg = 360.0 if Ms.is_full else max(largest - 1, 0) * h if largest else 0.0
        fr = fss_deficit(s, p, tol)
        rows.append((s.t, s.sup_norm(), check_U1(s, e_start, tol), len(Ms.arcs), largest_deg,
                     _axis_label(ds), fr.axial_deficit, fr.mono_deficit, dist_to_estimate(s, est)))
    return summary, rows, est


def metrics_csv(rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRIC_COLUMNS)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else
                    ("true" if x is True else "false" if x is False else x) for x in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# running

@dataclass(frozen=True, eq=False)
class RunResult:
    summary: RunSummary
    trajectory: Trajectory | None
    out_dir: Path
    aborted: bool = False


def _write_snapshots(traj: Trajectory, out: Path) -> list[Path]:
    d = out / "snapshots"
    d.mkdir(parents=True, exist_ok=True)
    return [write_field(s, d / f"snap_{i:06d}.txt") for i, s in enumerate(traj.snapshots)]


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> RunResult:
    """Integrate the scenario, analyse it and write all artifacts."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid()
    nl = make_nonlinearity(cfg.nonlinearity, **cfg.nonlinearity_params)
    u0 = build_initial(grid, cfg.initial)
    wall = time.perf_counter()
    try:
        traj = integrate(grid, u0, nl, cfg.scheme, cfg.t_end, cfg.snapshot_every, cfg.blowup_guard)
    except SolverError as err:
        partial = getattr(err, "trajectory", None)
        if partial is not None and cfg.emit_snapshots:
            _write_snapshots(partial, out)
        summary = RunSummary(
            status="aborted", e_start_deg=cfg.analysis.e_start_deg,
            u1_holds=check_U1(u0, cfg.analysis.e_start(cfg.ntheta),
                              cfg.analysis.tol * (u0.sup_norm() if cfg.analysis.relative else 1)),
            tol=float("nan"),
            max_sup_norm=float(partial.max_sup_norm) if partial is not None else float("nan"),
            t_final=float(err.t) if err.t is not None else float("nan"),
            steps=partial.steps if partial is not None else 0,
            snapshots=len(partial) if partial is not None else 0,
            omega_window=(float("nan"), float("nan")), omega_representatives=0,
            omega_diameter=float("nan"), m_arcs=(), m_full=False, antipodal_cover=False, axis="none",
            fss_certified=False, fss_reports=(), sweep={}, message=str(err),
            extra={"partial_artifacts": True},
        )
        (out / "summary.txt").write_text(summary.to_text())
        return RunResult(summary, partial, out, aborted=True)
    elapsed = time.perf_counter() - wall

    summary, rows, est = analyze_trajectory(traj, cfg.analysis)
    (out / "metrics.csv").write_text(metrics_csv(rows))
    (out / "summary.txt").write_text(summary.to_text())
    if cfg.emit_snapshots:
        _write_snapshots(traj, out)
    if cfg.emit_heatmaps:
        d = out / "heatmaps"
        d.mkdir(exist_ok=True)
        (d / "initial.pgm").write_text(render_pgm(traj.snapshots[0], cfg.heatmap_size))
        (d / "final.pgm").write_text(render_pgm(traj.snapshots[-1], cfg.heatmap_size))
        for i, rep in enumerate(est.representatives):
            (d / f"omega_rep_{i:03d}.pgm").write_text(render_pgm(rep, cfg.heatmap_size))
    (out / "timing.log").write_text(
        f"integrate_seconds = {elapsed:.3f}\nsteps = {traj.steps}\n"
        f"total_seconds = {time.perf_counter() - wall:.3f}\n"
    )
    return RunResult(summary, traj, out)


def trajectory_from_files(paths) -> Trajectory:
    """Load snapshot files (sorted by time) into a trajectory on one grid."""
    from .io import read_field

    paths = list(paths)
    if not paths:
        raise ConfigError("no snapshot files given")
    fields = [read_field(p) for p in paths]
    grid = fields[0].grid
    for p, f in zip(paths, fields):
        if f.grid != grid:
            raise ConfigError(f"grid {f.grid.shape} differs from {grid.shape} of {paths[0]}",
                              source=str(p))
    fields.sort(key=lambda f: f.t)
    for a, b in zip(fields, fields[1:]):
        if not b.t > a.t:
            raise ConfigError(f"duplicate snapshot time t={b.t!r}")
    sups = np.array([f.sup_norm() for f in fields])
    return Trajectory(tuple(fields), np.array([f.t for f in fields]), sups, 0,
                      {"source": "files"})


def analyze_files(paths, params: AnalysisParams = AnalysisParams(), out_dir=None) -> RunSummary:
    """Re-run the symmetry pipeline on stored snapshots (no simulation)."""
    traj = trajectory_from_files(paths)
    try:
        params.e_start(traj.grid.ntheta)
    except GridError as err:
        raise ConfigError(str(err), key="e_start") from None
    summary, rows, _ = analyze_trajectory(traj, params)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.csv").write_text(metrics_csv(rows))
        (out / "summary.txt").write_text(summary.to_text())
    return summary
