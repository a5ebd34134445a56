import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotasym.geometry import Direction, Field, GridError, RadialDomain, build_grid, reflect_field, rotate_direction, rotate_field
from rotasym.solver import Scheme, cubic, eigenpair_oracle, integrate
from rotasym.symmetry import (
    DOMINANT_MINUS,
    DOMINANT_PLUS,
    MIXED,
    SYMMETRIC,
    DirectionSet,
    check_U1,
    check_geo4,
    compute_M,
    default_tol,
    detect_axis,
    fss_deficit,
    fss_symmetrize,
    geo4_points,
    lemma1_conclusion,
    reflection_points,
    reflection_report,
    rotating_plane_sweep,
)

N = 32


@pytest.fixture(scope="module")
def grid():
    return build_grid(RadialDomain(), 12, N)


@pytest.fixture(scope="module")
def mode(grid):
    return eigenpair_oracle(grid, 1, 1)[1]


@pytest.fixture(scope="module")
def radial(grid):
    R, _ = grid.mesh()
    return Field(grid, np.cos(np.pi * R / 2))


def e_at(k):
    return Direction.from_index(k, N)


def random_field(grid, seed):
    return Field(grid, np.random.default_rng(seed).normal(size=grid.shape))


# --- reflection reports -------------------------------------------------------

def test_mode_dominant_for_e1(mode):
    rep = reflection_report(mode, e_at(0))
    assert rep.classification == DOMINANT_PLUS
    assert rep.w_min >= 0 and rep.in_M
    assert rep.margin == pytest.approx(2 * mode.sup_norm(), rel=1e-2)


def test_mode_symmetric_for_e2(mode):
    rep = reflection_report(mode, e_at(N // 2))
    assert rep.classification == SYMMETRIC
    assert rep.in_M


def test_mode_dominant_minus_for_minus_e1(mode):
    assert reflection_report(mode, e_at(N)).classification == DOMINANT_MINUS


def test_mixed_classification(grid):
    R, P = grid.mesh()
    u = Field(grid, R * np.cos(P) + R**2 * np.sin(2 * P))
    assert reflection_report(u, e_at(0)).classification == MIXED


def test_radial_symmetric_everywhere(radial):
    for k in range(2 * N):
        assert reflection_report(radial, e_at(k)).classification == SYMMETRIC


def test_joint_classification(mode):
    # u and -u together can only share symmetric directions
    M = compute_M([mode, -mode])
    assert set(M.indices().tolist()) == {N // 2, N + N // 2}


def test_off_lattice_direction_rejected(mode):
    with pytest.raises(GridError):
        reflection_report(mode, Direction(0.1))


def test_check_U1_examples(mode, radial):
    assert check_U1(mode, e_at(0))
    assert not check_U1(radial, e_at(0))
    assert not check_U1(-mode, e_at(0))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), k=st.integers(0, 2 * N - 1))
def test_antipodal_report_is_sign_swapped(grid, seed, k):
    u = random_field(grid, seed)
    a = reflection_report(u, e_at(k), 0.1)
    b = reflection_report(u, e_at(k + N), 0.1)
    assert (b.w_min, b.w_max) == (-a.w_max, -a.w_min)


# --- dominance set --------------------------------------------------------------

def test_M_of_mode_is_closed_half_circle(mode):
    M = compute_M(mode)
    assert len(M.arcs) == 1
    start, length = M.arcs[0]
    assert length == N + 1
    assert start == (-N // 2) % (2 * N)
    assert M.antipodal_cover()
    lo, hi = M.arc_angles()[0]
    assert (hi - lo) % (2 * math.pi) == pytest.approx(math.pi)


def test_M_radial_is_full(radial):
    M = compute_M(radial)
    assert M.is_full and M.arcs == [(0, 2 * N)]
    assert e_at(5) in M and 7 in M


def test_M_adding_mirror_image_is_harmless(mode):
    e = e_at(N // 2)  # a symmetry direction of the mode
    a = compute_M(mode)
    b = compute_M([mode, reflect_field(mode, e)])
    assert np.array_equal(a.members, b.members)


@settings(max_examples=40, deadline=None)
@given(members=st.lists(st.booleans(), min_size=2 * 8, max_size=2 * 8))
def test_arcs_partition_members(members):
    m = np.array(members)
    ds = DirectionSet(8, m, 0.0, ())
    covered = np.zeros_like(m)
    for s, length in ds.arcs:
        idx = (s + np.arange(length)) % m.size
        assert not covered[idx].any()
        covered[idx] = True
        # maximal: neighbours just outside the arc are not members
        if length < m.size:
            assert not m[(s - 1) % m.size] and not m[(s + length) % m.size]
    assert np.array_equal(covered, m)


def test_default_tol_scales_with_field(mode):
    assert default_tol(mode) == pytest.approx(1e-8 * mode.sup_norm())
    assert default_tol([mode, 3 * mode]) == pytest.approx(3e-8 * mode.sup_norm())


# --- one dimensional checks ---------------------------------------------------

PHI = 2 * np.pi * np.arange(64) / 64


def test_reflection_points_examples():
    np.testing.assert_allclose(reflection_points(np.cos(PHI), 1e-12), [0, np.pi])
    np.testing.assert_allclose(reflection_points(np.cos(2 * PHI), 1e-12),
                               [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert len(reflection_points(np.ones(64))) == 128


def test_geo4_examples():
    v = np.cos(PHI)
    assert check_geo4(v, -np.pi / 2, 1e-12)
    assert check_geo4(v, Direction(-np.pi / 2), 1e-12)
    assert not check_geo4(v, 0.0, 1e-12)
    w = np.cos(2 * PHI)
    assert len(geo4_points(w, 1e-12)) == 0
    assert not any(check_geo4(w, math.pi * m / 64, 1e-12) for m in range(128))


def test_geo4_off_lattice_rejected():
    with pytest.raises(GridError):
        check_geo4(np.cos(PHI), 0.01)


def test_reflection_implication_examples():
    assert len(geo4_points(np.cos(PHI) + 0.3 * np.cos(3 * PHI), 1e-12)) > 0
    assert lemma1_conclusion(np.cos(PHI) + 0.3 * np.cos(3 * PHI), 1e-12)
    assert lemma1_conclusion(np.cos(2 * PHI), 1e-12)
    assert lemma1_conclusion(np.zeros(64))
    with pytest.raises(ValueError):
        lemma1_conclusion(np.sin(PHI), 1e-12)


@settings(max_examples=200, deadline=None)
@given(coef=st.lists(st.floats(-1, 1), min_size=5, max_size=5))
def test_reflection_implication_property(coef):
    v = np.asarray(coef) @ np.cos(np.outer(np.arange(5), PHI))
    assert lemma1_conclusion(v, 1e-10 * max(1.0, np.abs(v).max()))


# --- foliated Schwarz symmetry ------------------------------------------------

def test_fss_symmetrize_example():
    g = build_grid(RadialDomain(), 4, 8)
    # on the 8-column grid, p = 0 enumerates columns 0, 1, 7, 2, 6, 3, 5, 4
    u = Field(g, np.tile(np.arange(8.0)[::-1], (4, 1)))
    out = fss_symmetrize(u, Direction(0.0)).values[0]
    np.testing.assert_array_equal(out, [7, 6, 4, 2, 0, 1, 3, 5])


def test_fss_symmetrize_four_point_ring():
    # values [3, 1, 2, 0] at 0, pi/2, pi, 3pi/2 about p = 0 become [3, 2, 0, 1]
    from rotasym.symmetry import _enumeration

    order = _enumeration(4, 0)
    assert order.tolist() == [0, 1, 3, 2]
    values = np.array([3.0, 1, 2, 0])
    out = np.empty(4)
    out[order] = -np.sort(-values)
    np.testing.assert_array_equal(out, [3, 2, 0, 1])


def test_fss_fixed_points(mode, radial):
    for f, p in ((mode, e_at(0)), (radial, e_at(7))):
        rep = fss_deficit(f, p)
        assert rep.axial_deficit == 0 and rep.mono_deficit == 0 and rep.verdict
    s = fss_symmetrize(mode, e_at(0))
    np.testing.assert_allclose(s.values, mode.values, atol=0)


def test_fss_deficit_about_wrong_pole(mode):
    rep = fss_deficit(mode, e_at(N))
    assert rep.axial_deficit == 0
    osc = (mode.values.max(axis=1) - mode.values.min(axis=1)).max()
    assert rep.mono_deficit == pytest.approx(osc)
    assert not rep.verdict


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31), k=st.integers(0, 2 * N - 1))
def test_fss_symmetrize_properties(grid, seed, k):
    u = random_field(grid, seed)
    p = e_at(k)
    s = fss_symmetrize(u, p)
    assert np.array_equal(fss_symmetrize(s, p).values, s.values)
    assert np.array_equal(np.sort(s.values, axis=1), np.sort(u.values, axis=1))
    assert np.array_equal(s.values.max(axis=1), u.values.max(axis=1))
    # a symmetrized field is monotone in theta along the + side
    assert fss_deficit(s, p).mono_deficit == 0


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31), k=st.integers(0, 2 * N - 1))
def test_verdict_implies_fixed_point(grid, seed, k):
    p = e_at(k)
    # mirror-pair the values so the symmetrized field is axially symmetric
    s = fss_symmetrize(random_field(grid, seed), p)
    sym = Field(grid, np.maximum(s.values, reflect_field(s, Direction(p.angle + math.pi / 2)).values))
    rep = fss_deficit(sym, p)
    if rep.verdict:
        assert np.array_equal(fss_symmetrize(sym, p).values, sym.values)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31), monotone=st.booleans())
def test_equivalence_for_axially_symmetric_fields(grid, seed, monotone):
    # fields built as h(distance to the axis) are exactly axially symmetric;
    # for them the verdict and the fixed-point property coincide
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(grid.nr, N // 2 + 1))
    if monotone:
        h = -np.sort(-h, axis=1)
    j = np.arange(N)
    u = Field(grid, h[:, np.minimum(j, N - j)])
    p = e_at(0)
    rep = fss_deficit(u, p)
    assert rep.axial_deficit == 0
    fixed = np.array_equal(fss_symmetrize(u, p).values, u.values)
    assert rep.verdict == fixed


def test_fixed_point_without_pairing_is_not_fss():
    g = build_grid(RadialDomain(), 4, 8)
    u = Field(g, np.tile(np.arange(8.0)[::-1], (4, 1)))
    s = fss_symmetrize(u, Direction(0.0))
    rep = fss_deficit(s, Direction(0.0))
    assert rep.mono_deficit == 0 and rep.axial_deficit > 0


# --- axis detection and sweep -----------------------------------------------------

def test_detect_axis_half_circle(mode):
    det = detect_axis(compute_M(mode), mode)
    assert det.axis.require_index(N) == 0 and det.certified and not det.radial


def test_detect_axis_radial(radial):
    det = detect_axis(compute_M(radial), radial)
    assert det.radial and det.found and det.axis is None and det.certified


def test_detect_axis_fails_without_cover(grid):
    R, P = grid.mesh()
    u = Field(grid, R * (1 - R) * np.cos(2 * P))
    M = compute_M(u)
    assert not M.antipodal_cover()
    det = detect_axis(M, u)
    assert det.axis is None and not det.found and "lattice indices" in det.diagnostics


def test_detect_axis_tie_break():
    members = np.zeros(2 * 8, bool)
    members[[2, 3, 4]] = True
    members[[10, 11, 12]] = True
    ds = DirectionSet(8, members, 0.0, ())
    from rotasym.symmetry import _largest_arc

    assert _largest_arc(ds) == (2, 3)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), k=st.integers(0, 2 * N - 1), s=st.integers(1, N - 1))
def test_detection_rotational_covariance(grid, seed, k, s):
    u = fss_symmetrize(random_field(grid, seed), e_at(k))
    a = detect_axis(compute_M(u), u)
    v = rotate_field(u, s)
    b = detect_axis(compute_M(v), v)
    assert a.axis is not None and b.axis is not None
    assert b.axis.require_index(N) == rotate_direction(a.axis, s, N).require_index(N)


def test_sweep_examples(mode, radial):
    sw = rotating_plane_sweep(mode, e_at(0))
    assert sw.theta1 == pytest.approx(math.pi / 2) and sw.theta2 == pytest.approx(-math.pi / 2)
    assert sw.boundaries_symmetric and not sw.full
    sw = rotating_plane_sweep(radial, e_at(3))
    assert sw.full and sw.span >= 2 * math.pi
    with pytest.raises(ValueError):
        rotating_plane_sweep(mode, e_at(N))


def test_sweep_on_nonradial_limit():
    # odd data stays odd; a supercritical cubic drives it to a nodal FSS state
    g = build_grid(RadialDomain(), 24, 48)
    u0 = eigenpair_oracle(g, 1, 1)[1]
    traj = integrate(g, u0, cubic(25.0, 1.0), Scheme(dt=5e-3), 6.0, 0.5)
    end = traj.snapshots[-1]
    tol = 1e-3 * traj.max_sup_norm
    M = compute_M(end, tol)
    det = detect_axis(M, end, tol)
    assert not det.radial and det.axis.require_index(48) == 0 and det.certified
    sw = rotating_plane_sweep(end, Direction(0.0), tol)
    assert sw.span == pytest.approx(math.pi) and sw.boundaries_symmetric
    # openness: directions dominant with a clear margin have both neighbours in M
    for k, rep in enumerate(M.reports):
        if rep.classification == DOMINANT_PLUS and rep.margin > 10 * tol:
            assert (k - 1) in M and (k + 1) in M
