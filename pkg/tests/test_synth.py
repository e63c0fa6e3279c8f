import math
import warnings

import numpy as np
import pytest
from scipy import stats

from boundarykit import synth
from boundarykit.errors import BumpAdmissibilityWarning, InvalidParams, OutsideDomain
from boundarykit.geomcore import hausdorff, principal_angle
from boundarykit.synth import (
    KINDS,
    BumpMap,
    bump,
    fd_gradient_norms,
    fd_hessian_norms,
    fd_map_deviation_norm,
    make_manifold,
    rng_from_seed,
)

from oracles import (
    annulus_mean_norm,
    annulus_norm_sd,
    bump_phi,
    helix_reach_grid,
    moebius_boundary_reach_grid,
    moebius_distance_grid,
    moebius_reach_grid,
)

FAST_KINDS = ["segment", "circle", "sphere", "half_sphere", "annulus", "spiral", "moebius", "bumped_ball"]


# ---------------------------------------------------------------- samplers


def test_annulus_mean_norm():
    X = make_manifold("annulus").sample_uniform(100_000, seed=0).points
    r = np.linalg.norm(X, axis=1)
    se = annulus_norm_sd() / math.sqrt(len(r))
    assert abs(r.mean() - annulus_mean_norm()) <= 3 * se
    assert r.min() >= 0.4 - 1e-12 and r.max() <= 1 + 1e-12


def test_circle_on_unit_circle():
    X = make_manifold("circle").sample_uniform(5000, seed=1).points
    assert np.max(np.abs(np.linalg.norm(X, axis=1) - 1)) <= 1e-12


def test_spiral_parameter_uniform():
    X = make_manifold("spiral").sample_uniform(10_000, seed=2).points
    theta = 3 * X[:, 2]
    ks = stats.kstest(theta, stats.uniform(0, 5 * np.pi).cdf).statistic
    assert ks < 0.02


def test_half_sphere_uniform_cap_areas():
    # area of {x_0 >= c} on the unit sphere is 2 pi (1 - c): linear in c
    X = make_manifold("half_sphere").sample_uniform(50_000, seed=3).points
    ks = stats.kstest(X[:, 0], stats.uniform(0, 1).cdf).statistic
    assert ks < 0.01


def test_moebius_sampler_matches_area_element():
    M = make_manifold("moebius")
    X = M.sample_uniform(20_000, seed=4).points
    # the height u sin(t/2) and the radius both follow from (u, t); check |z| <= 1
    assert np.max(np.abs(X[:, 2])) <= 1 + 1e-12
    # the area element depends on t only through u cos(t/2), which cancels
    # under u -> -u, so the polar angle is uniform
    t = np.mod(np.arctan2(X[:, 1], X[:, 0]), 2 * np.pi)
    counts = np.histogram(t, bins=8, range=(0, 2 * np.pi))[0]
    assert stats.chisquare(counts).pvalue > 1e-3


def test_determinism_and_seed_sensitivity():
    M = make_manifold("sphere")
    a = M.sample_uniform(100, seed=7).points
    assert np.array_equal(a, M.sample_uniform(100, seed=7).points)
    assert not np.array_equal(a, M.sample_uniform(100, seed=8).points)
    # counter-based stream: the first draws do not depend on the platform
    g = rng_from_seed(0)
    assert isinstance(g.bit_generator, np.random.Philox)


def test_bad_requests():
    with pytest.raises(InvalidParams):
        make_manifold("torus")
    with pytest.raises(InvalidParams):
        make_manifold("circle").sample_uniform(0, seed=0)
    with pytest.raises(InvalidParams):
        BumpMap(0.01, 0.0, np.zeros(2), np.eye(2)[0])


@pytest.mark.parametrize("kind", FAST_KINDS)
def test_samples_lie_on_manifold(kind):
    M = make_manifold(kind)
    X = M.sample_uniform(60, seed=5).points
    assert np.max(M.distance_to(X)) <= 1e-9
    meta = M.metadata()
    assert meta["kind"] == kind
    assert M.reach > 0 and M.min_reach > 0
    assert make_manifold(kind, **M.params()) == M


def test_bumped_sphere_samples_on_manifold():
    M = make_manifold("bumped_sphere")
    X = M.sample_uniform(20, seed=6).points
    assert np.max(M.distance_to(X)) <= 1e-9


def test_all_kinds_listed():
    assert set(FAST_KINDS) | {"bumped_sphere"} == set(KINDS)


# ---------------------------------------------------------------- distances


def test_annulus_distances():
    M = make_manifold("annulus")
    assert M.distance_to_boundary(np.array([0.7, 0.0])) == pytest.approx(0.3)
    assert M.distance_to_boundary(np.array([0.0, 0.5])) == pytest.approx(0.1)
    assert M.distance_to(np.array([0.0, 0.0])) == pytest.approx(0.4)
    with pytest.raises(OutsideDomain):
        M.distance_to_boundary(np.array([0.1, 0.0]))


def test_half_sphere_distances():
    M = make_manifold("half_sphere")
    assert M.distance_to_boundary(np.array([1.0, 0.0, 0.0])) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert M.distance_to(np.array([0.0, 0.0, 0.0])) == pytest.approx(1.0)
    assert M.distance_to(np.array([-1.0, 0.0, 0.0])) == pytest.approx(math.sqrt(2))


def test_segment_and_spiral_boundary():
    S = make_manifold("spiral")
    a = S.curve(0.0)
    assert S.distance_to_boundary(a) == 0.0
    circle = make_manifold("circle")
    assert circle.distance_to_boundary(np.array([1.0, 0.0])) == math.inf
    with pytest.raises(OutsideDomain):
        circle.exact_outward_normal(np.array([1.0, 0.0]))


def test_moebius_distance_grid_doubling(monkeypatch):
    M = make_manifold("moebius")
    rng = np.random.default_rng(8)
    X = M.sample_uniform(5, seed=9).points
    Z = X + 0.2 * rng.standard_normal(X.shape)
    base = M.distance_to(Z)
    monkeypatch.setattr(synth, "GRID_NODES", 4 * synth.GRID_NODES)
    fine = M.distance_to(Z)
    np.testing.assert_allclose(base, fine, atol=1e-6)
    for z, v in zip(Z, base):
        assert v == pytest.approx(moebius_distance_grid(z, 200), abs=1e-6)


def test_moebius_boundary_distance_grid_doubling(monkeypatch):
    M = make_manifold("moebius")
    X = M.sample_uniform(5, seed=10).points
    base = M.distance_to_boundary(X)
    monkeypatch.setattr(synth, "GRID_NODES", 4 * synth.GRID_NODES)
    np.testing.assert_allclose(base, M.distance_to_boundary(X), atol=1e-6)


def test_reach_constants_against_pair_ratio():
    # the grid estimate approaches the reach from above; the frozen
    # constants are rounded-down lower bounds close to it
    for const, est in (
        (synth.SPIRAL_REACH, helix_reach_grid(1500)),
        (synth.MOEBIUS_BOUNDARY_REACH, moebius_boundary_reach_grid(1500)),
        (synth.MOEBIUS_REACH, moebius_reach_grid(30, 200)),
    ):
        assert const <= est <= 1.05 * const


# ---------------------------------------------------------------- tangents and normals


def test_outward_normal_examples():
    A = make_manifold("annulus")
    x = np.array([0.6, 0.8])
    np.testing.assert_allclose(A.exact_outward_normal(x), x, atol=1e-15)
    x = np.array([0.0, 0.4])
    np.testing.assert_allclose(A.exact_outward_normal(x), [0.0, -1.0], atol=1e-15)
    H = make_manifold("half_sphere")
    t = 0.7
    np.testing.assert_allclose(H.exact_outward_normal(np.array([0.0, math.cos(t), math.sin(t)])), [-1, 0, 0])


@pytest.mark.parametrize("kind", ["half_sphere", "annulus", "spiral", "moebius", "segment"])
def test_outward_normal_leaves_manifold(kind):
    M = make_manifold(kind)
    G = M.boundary_grid(16)
    for x in G:
        eta = M.exact_outward_normal(x)
        assert np.linalg.norm(eta) == pytest.approx(1.0, abs=1e-12)
        F = M.exact_tangent(x)
        # curved kinds locate the foot point to the oracle accuracy 1e-6
        assert np.linalg.norm(eta - F.project(eta)) <= 1e-6
        # stepping along eta leaves M (first order), stepping back stays close
        t = 1e-3
        assert M.distance_to(x + t * eta) >= 0.5 * t
        assert M.distance_to(x - t * eta) <= 0.1 * t


@pytest.mark.invariant
@pytest.mark.parametrize("kind", ["circle", "sphere", "half_sphere", "spiral", "moebius"])
def test_tangent_frames_continuous(kind):
    M = make_manifold(kind)
    X = M.sample_uniform(400, seed=11).points
    frames = [M.exact_tangent(x) for x in X]
    for F in frames:
        np.testing.assert_allclose(F.basis @ F.basis.T, np.eye(M.intrinsic_dim), atol=1e-10)
    checked = 0
    for a in range(len(X)):
        for b in range(a + 1, len(X)):
            dist = float(np.linalg.norm(X[a] - X[b]))
            if dist > M.reach / 4:
                continue
            # the geodesic exceeds the chord by a bounded factor at this scale
            assert principal_angle(frames[a], frames[b]) <= 4 * 2 * dist / M.reach
            checked += 1
    assert checked > 20


# ---------------------------------------------------------------- bump map


def test_bump_values():
    np.testing.assert_allclose(bump(np.zeros(3)), 1.0)
    pts = np.random.default_rng(12).uniform(-1.2, 1.2, (500, 2))
    np.testing.assert_allclose(bump(pts), bump_phi(pts), rtol=1e-14, atol=0)
    b = BumpMap(0.01, 0.5, np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    np.testing.assert_allclose(b(np.array([1.0, 0.0])), [1.01, 0.0])


@pytest.mark.invariant
def test_bump_fixed_outside_support():
    b = BumpMap(0.02, 0.3, np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0]))
    rng = np.random.default_rng(13)
    P = rng.uniform(-2, 2, (2000, 3))
    out = np.linalg.norm(P - b.x0, axis=1) >= 0.3
    assert np.max(np.abs(b(P[out]) - P[out])) <= 1e-15


def test_bump_derivative_bounds_grid():
    g = np.linspace(-1, 1, 41)
    A, B = np.meshgrid(g, g)
    P = np.column_stack([A.ravel(), B.ravel()])
    P = P[np.sum(P * P, axis=1) < 1]
    assert fd_gradient_norms(bump, P).max() <= 2.5 * 1.01
    assert fd_hessian_norms(bump, P).max() <= 23 * 1.01


def test_bumped_sphere_admissible_deviation():
    M = make_manifold("bumped_sphere")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert M.bump_map.check_admissible(1.0)
    base = make_manifold("sphere").sample_uniform(3000, seed=14).points
    assert fd_map_deviation_norm(M.bump_map, base).max() <= 0.1


def test_bump_admissibility_warning():
    b = BumpMap(0.3, 0.5, np.zeros(2), np.eye(2)[0])
    with pytest.warns(BumpAdmissibilityWarning):
        assert not b.check_admissible(1.0)


def test_bumped_sphere_hausdorff_separation():
    M = make_manifold("bumped_sphere", eta=0.05, delta=0.5)
    base = make_manifold("sphere").sample_uniform(4000, seed=15).points
    bumped = M.bump_map(base)
    dist = np.linalg.norm(base[:, None, :] - base[None, :400, :], axis=2)
    resolution = float(np.max(np.sort(dist, axis=0)[1]))
    # the bump tip x0 + eta e1 is eta away from the base sphere
    tip = M.bump_map(np.array([[1.0, 0.0, 0.0]]))
    assert make_manifold("sphere").distance_to(tip[0]) == pytest.approx(0.05, abs=1e-12)
    assert hausdorff(base, bumped) >= 0.05 - resolution
