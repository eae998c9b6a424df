import numpy as np
import pytest
from scipy.spatial import ConvexHull

from oracles import family, random_family, sphere_fov_samples
from polystab.core import evaluate_coeffs, horner_matrix_batch
from polystab.grids import polyline_hausdorff
from polystab.pseudospectral import check_axis_symmetry
from polystab.ranges import (
    DegenerateLeadingCoefficientError,
    FovQuery,
    fov_contains_zero,
    fov_signed_distance,
    jw_points,
    jw_sample,
    numrange_grid,
    numrange_membership,
    reconstruct_w_from_jw,
    w_bound,
    w_boundary,
)
from polystab.regularity import fit_holder, sample_scale_pairs
from polystab.scalar_poly import aberth_roots_batch
from polystab.spectral import directed_hausdorff, hausdorff, spectrum_at

SEGMENT = [[["0", "0"], ["0", "-1"]], [["1", "0"], ["0", "1"]]]  # lam I - diag(0, 1)


def test_fov_query_validation():
    with pytest.raises(ValueError):
        FovQuery(np.ones((2, 3)))
    with pytest.raises(ValueError):
        FovQuery(np.eye(2), angle_count=4)


def test_fov_examples():
    assert not fov_contains_zero(FovQuery(np.eye(3)))
    assert fov_contains_zero(FovQuery(np.diag([1.0, -1.0])))
    # nilpotent Jordan block: F is the disk of radius 1/2
    assert fov_contains_zero(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert fov_signed_distance(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(-0.5, abs=1e-9)


def test_fov_agrees_with_sphere_oracle():
    rng = np.random.default_rng(77)
    checked = 0
    for _ in range(30):
        M = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) + complex(*rng.uniform(-2, 2, 2))
        vals = sphere_fov_samples(M, 100_000, rng)
        hull = ConvexHull(np.c_[vals.real, vals.imag])
        # signed distance from 0 to the sampled hull (positive outside); the
        # sampled hull lies inside the field of values
        margin = float(np.max(hull.equations[:, 2]))
        assert margin >= fov_signed_distance(M) - 1e-9 * np.linalg.norm(M)
        if abs(margin) <= 1e-3:
            continue
        checked += 1
        assert fov_contains_zero(FovQuery(M)) == (margin < 0)
    assert checked >= 20


def test_membership_scalar_is_spectrum(linear):
    assert numrange_membership(linear, [2.0], -2.0)
    assert not numrange_membership(linear, [2.0], -1.9)


def test_membership_segment():
    f = family(SEGMENT, 1)
    assert numrange_membership(f, [0.0], 0.5)
    assert not numrange_membership(f, [0.0], 2.0)


def test_membership_degenerate_leading():
    f = family([[["1", "0"], ["0", "1"]], [["1", "0"], ["0", "-1"]]], 1)
    with pytest.raises(DegenerateLeadingCoefficientError):
        numrange_membership(f, [0.0], 0.3)


def test_membership_matches_root_cloud(rng):
    f = random_family(rng, 2, 2, 1)
    u = np.array([0.3])
    c = jw_sample(f, u, 10_000, seed=4)
    roots = reconstruct_w_from_jw(c)
    # every root of x* P x = 0 lies in W
    sample = roots[:: 50]
    assert all(numrange_membership(f, u, z) for z in sample)
    g = numrange_grid(f, u, (-3, 3, -3, 3), (41, 41))
    inside = g.spec.nodes()[g.center_member]
    # members sit near the sampled root cloud, and clear outsiders far from it
    assert directed_hausdorff(inside, roots) <= 2 * g.spec.diagonal
    outside = g.spec.nodes()[g.values > 0.2]
    assert np.min(np.abs(outside[:, None] - roots[None, ::10])) > 1e-3


def test_grid_segment():
    f = family(SEGMENT, 1)
    g = numrange_grid(f, [0.0], (-1, 2, -1, 1), (31, 21))
    pts = g.member_points()
    hr, hi = g.spec.steps
    assert np.all(np.abs(pts.imag) <= hi) and np.all((pts.real >= -hr) & (pts.real <= 1 + hr))
    assert g.components == 1
    # every node of the segment is a member
    on = (np.abs(g.spec.nodes().imag) < 1e-12) & (g.spec.nodes().real >= 0) & (g.spec.nodes().real <= 1)
    assert np.all(g.member[on])


def test_grid_scalar_quadratic_two_points():
    f = family([[["-1"]], [["0"]], [["1"]]], 1)
    g = numrange_grid(f, [0.0], (-2, 2, -2, 2), (41, 41))
    assert g.components == 2 <= f.d
    assert directed_hausdorff(g.member_points(), [-1, 1]) <= g.spec.diagonal
    assert g.checks["component_bound"]


def test_spectrum_in_w_and_bounded(rng):
    for _ in range(5):
        f = random_family(rng, 2, 2, 2)
        u = rng.uniform(-1, 1, 2)
        s = spectrum_at(f, u)
        for lam in s.values:
            assert numrange_membership(f, u, lam)
        r = w_bound(f, u)
        g = numrange_grid(f, u, (-r, r, -r, r), (31, 31))
        for lam in s.values:
            j, i = g.spec.cell_of(lam)
            assert g.member[j, i]
        assert np.all(np.abs(g.member_points()) <= r + g.spec.diagonal)
        assert np.all(np.abs(reconstruct_w_from_jw(jw_sample(f, u, 300))) <= r)
        assert g.checks["component_bound"]


def test_w_real_family_symmetric(rng):
    f = random_family(rng, 2, 2, 2, real=True)
    u = rng.uniform(-1, 1, 2)
    r = w_bound(f, u)
    g = numrange_grid(f, u, (-r, r, -r, r), (41, 41))
    _, _, inner = check_axis_symmetry(g)
    assert inner == 0


def test_w_sample_deviation_bound(rng):
    f = random_family(rng, 2, 2, 2)
    u = rng.uniform(-1, 1, 2)
    x = jw_sample(f, u, 200, seed=9).vectors
    for h in (0.3, 0.05, 0.001):
        v = u + h * np.array([0.6, -0.8])
        Cu = evaluate_coeffs(f, u).coeffs
        Cv = evaluate_coeffs(f, v).coeffs
        ru, _, _ = aberth_roots_batch(jw_points(Cu, x))
        rv, _, _ = aberth_roots_batch(jw_points(Cv, x))
        for k in range(x.shape[0]):
            for lam in ru[k]:
                bound = np.linalg.norm(horner_matrix_batch(Cu, lam) - horner_matrix_batch(Cv, lam), 2) ** (1 / f.d)
                assert np.min(np.abs(rv[k] - lam)) <= bound * (1 + 1e-8) + 1e-12


def test_jw_deviation_bound(rng):
    f = random_family(rng, 2, 2, 2)
    u = rng.uniform(-1, 1, 2)
    for h in (0.5, 0.01):
        v = u + h * np.array([0.0, 1.0])
        a, b = jw_sample(f, u, 500, seed=2), jw_sample(f, v, 500, seed=2)
        diff = evaluate_coeffs(f, u).coeffs - evaluate_coeffs(f, v).coeffs
        bound = max(np.linalg.norm(D, 2) for D in diff)
        assert np.max(np.abs(a.points - b.points)) <= bound * (1 + 1e-10)


def test_jw_examples():
    f = family([[["0.5-0.25i"]], [["1"]]], 1)
    c = jw_sample(f, [0.0], 50)
    np.testing.assert_allclose(c.points, np.tile([0.5 - 0.25j, 1.0], (51, 1)), atol=1e-14)
    assert np.all(c.points[:, -1] == 1.0)
    g = family(SEGMENT, 1)
    c = jw_sample(g, [0.0], 10_000)
    first = -c.points[:, 0].real  # x* A_0 x = -|x_2|^2
    assert first.min() <= 0.01 and first.max() >= 0.99
    with pytest.raises(ValueError):
        jw_sample(g, [0.0], 0)


def test_reconstruct_examples(diag):
    f = family([[["2"]], [["1"]]], 1)
    np.testing.assert_allclose(reconstruct_w_from_jw(jw_sample(f, [0.0], 5)), -2.0)
    c = jw_sample(diag, [0.5, -1.5], 20)
    basis = reconstruct_w_from_jw(c.points[:2])
    np.testing.assert_allclose(np.sort(basis.real), [-0.5, 1.5], atol=1e-12)
    with pytest.raises(DegenerateLeadingCoefficientError):
        reconstruct_w_from_jw(np.array([[1.0, 0.0]]))


def test_reconstruct_matches_grid(rng):
    f = random_family(rng, 2, 2, 2)
    u = rng.uniform(-1, 1, 2)
    pts = reconstruct_w_from_jw(jw_sample(f, u, 10_000, seed=1))
    assert all(numrange_membership(f, u, z) for z in pts[::200])
    r = w_bound(f, u)
    g = numrange_grid(f, u, (-r, r, -r, r), (61, 61))
    assert hausdorff(pts, g.member_points()) <= 2 * g.spec.diagonal


def test_boundary_stability(rng):
    f = random_family(rng, 2, 1, 2)
    u = rng.uniform(-1, 1, 2)
    direction = np.array([1.0, 0.0])
    fit = fit_holder(sample_scale_pairs(f, u, "numrange", direction, [2.0 ** -k for k in range(2, 9)]))
    r = w_bound(f, u) + 0.5
    region, res = (-r, r, -r, r), (121, 121)
    diag = 2 * r / 120 * np.sqrt(2)
    b0 = w_boundary(f, u, region, res)
    for h in (0.3, 0.07, 0.011):
        b1 = w_boundary(f, u + h * direction, region, res)
        assert polyline_hausdorff(b0, b1) <= fit.c_hat * h ** fit.alpha_hat + 2 * diag


def test_w_boundary_no_interior():
    f = family(SEGMENT, 1)
    assert w_boundary(f, [0.0], (-1, 2, -1, 1), (31, 21)) == []
