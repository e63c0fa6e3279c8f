import math
import warnings

import numpy as np
import pytest

from boundarykit.calibrate import (
    bandwidth_h,
    default_k,
    find_jump,
    knn_radii,
    r_effective,
    scale_R0,
    threshold_rho,
)
from boundarykit.errors import InvalidK, InvalidParams, LowContrast, NoAdmissibleScale, TooFewRadii
from boundarykit.geomcore import Frame, PointCloud
from boundarykit.pipeline import calibrate_cloud
from boundarykit.synth import make_manifold
from boundarykit.tangent import exact_tangent_field

from conftest import N_CASES, random_rotation
from oracles import brute_knn_radius, circle_distortion_chord


# ---------------------------------------------------------------- bandwidth


def test_bandwidth_line_examples():
    cloud = PointCloud(np.array([[0.0], [1.0], [2.0]]), 1)
    assert bandwidth_h(cloud, 2) == 1.0
    assert bandwidth_h(cloud, 1) == 0.0
    with pytest.raises(InvalidK):
        bandwidth_h(cloud, 4)
    with pytest.raises(InvalidK):
        bandwidth_h(cloud, 0)


def test_default_k_clamped():
    assert default_k(1000, 2) == math.ceil(2 * math.log(1000))
    assert default_k(3, 2) == 3
    assert default_k(2, 1) == 2


def test_bandwidth_matches_brute_force():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(200, 3))
    cloud = PointCloud(X, 2)
    for k in (1, 2, 5, 17, 200):
        assert bandwidth_h(cloud, k) == pytest.approx(brute_knn_radius(X, k), abs=1e-12)


@pytest.mark.invariant
def test_bandwidth_monotone_and_rigid():
    rng = np.random.default_rng(1)
    for _ in range(N_CASES):
        n = int(rng.integers(3, 25))
        X = rng.standard_normal((n, 3))
        cloud = PointCloud(X, 2)
        radii = [bandwidth_h(cloud, k) for k in range(1, n + 1)]
        assert np.all(np.diff(radii) >= 0)
        k = int(rng.integers(1, n + 1))
        Q = random_rotation(rng, 3)
        moved = PointCloud(X @ Q.T + rng.standard_normal(3), 2)
        assert bandwidth_h(moved, k) == pytest.approx(radii[k - 1], abs=1e-9)


def test_knn_radii_per_point():
    cloud = PointCloud(np.array([[0.0], [1.0], [3.0]]), 1)
    np.testing.assert_array_equal(knn_radii(cloud, 2), [1.0, 1.0, 2.0])


# ---------------------------------------------------------------- R0


def test_R0_flat_plane_is_diameter():
    rng = np.random.default_rng(2)
    P = np.column_stack([rng.uniform(-1, 1, (60, 2)), np.zeros(60)])
    Q = random_rotation(rng, 3)
    X = P @ Q.T
    tf = exact_tangent_field([Frame(Q[:, :2].T)] * 60)
    diam = max(math.dist(a, b) for a in X for b in X)
    assert scale_R0(PointCloud(X, 2), tf, 0.3) == pytest.approx(diam, abs=1e-12)


def _circle_with_exact_frames(n, seed):
    M = make_manifold("circle")
    cloud = M.sample_uniform(n, seed=seed)
    return cloud, exact_tangent_field([M.exact_tangent(x) for x in cloud.points])


def test_R0_circle_matches_chord_oracle():
    cloud, tf = _circle_with_exact_frames(400, 3)
    R0 = scale_R0(cloud, tf, 0.3)
    chord = circle_distortion_chord(0.3)
    # every pair shorter than the critical chord passes, the next one fails;
    # the returned value is the longest passing pair
    X = cloud.points
    D = np.linalg.norm(X[:, None] - X[None], axis=2)
    below = D[D < chord - 1e-9]
    assert R0 <= chord + 1e-9
    assert R0 >= below.max() - 1e-9
    assert chord - R0 <= 0.01


def test_R0_zero_delta_and_bad_delta():
    cloud, tf = _circle_with_exact_frames(200, 4)
    with pytest.raises(NoAdmissibleScale):
        scale_R0(cloud, tf, 1e-12)
    with pytest.raises(InvalidParams):
        scale_R0(cloud, tf, 0.0)
    with pytest.raises(InvalidParams):
        scale_R0(cloud, tf, 1.0)


@pytest.mark.invariant
def test_R0_monotone_in_delta():
    cloud, tf = _circle_with_exact_frames(150, 5)
    vals = [scale_R0(cloud, tf, d) for d in (0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.9)]
    assert np.all(np.diff(vals) >= 0)


# ---------------------------------------------------------------- rho


def test_rho_examples():
    assert threshold_rho([0.01, 0.012, 0.011, 0.9, 0.95]) == pytest.approx(0.456, abs=1e-12)
    with pytest.warns(LowContrast):
        assert threshold_rho([0.3, 0.3, 0.3]) == 0.3
    with pytest.raises(TooFewRadii):
        threshold_rho([0.3])
    with pytest.raises(TooFewRadii):
        threshold_rho([0.3, math.inf])
    with pytest.raises(InvalidParams):
        threshold_rho([0.1, 0.2], rule="median")


def test_rho_earliest_maximal_gap():
    j = find_jump([0.0, 1.0, 2.0, 3.0])
    assert j.index == 0 and j.midpoint == 0.5


@pytest.mark.invariant
def test_rho_permutation_and_scale():
    rng = np.random.default_rng(6)
    for _ in range(N_CASES):
        r = rng.exponential(size=int(rng.integers(2, 40)))
        base = threshold_rho(r)
        assert threshold_rho(rng.permutation(r)) == base
        c = float(rng.uniform(0.1, 10))
        assert threshold_rho(c * r) == pytest.approx(c * base, rel=1e-12)
        h = float(rng.uniform(0.1, 3))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowContrast)
            a = threshold_rho(r, rule="first-above-factor", scale=h)
            b = threshold_rho(c * r, rule="first-above-factor", scale=c * h)
        assert b == pytest.approx(c * a, rel=1e-12) or (math.isinf(a) and math.isinf(b))


def test_rho_first_above_factor():
    radii = [0.01, 0.02, 0.03, 0.2, 0.25, 0.9]
    # the largest gap is 0.25 -> 0.9, the first crossing of h = 0.1 is 0.03 -> 0.2
    assert threshold_rho(radii) == pytest.approx(0.575)
    assert threshold_rho(radii, rule="first-above-factor", scale=0.1) == pytest.approx(0.115)
    assert threshold_rho(radii, rule="first-above-factor", scale=0.1, factor=3.0) == pytest.approx(0.575)
    with pytest.warns(LowContrast):
        assert math.isinf(threshold_rho(radii, rule="first-above-factor", scale=5.0))
    with pytest.warns(LowContrast):
        assert math.isinf(threshold_rho(radii, rule="first-above-factor", scale=0.001))
    with pytest.raises(InvalidParams):
        threshold_rho(radii, rule="first-above-factor")


def test_rho_separates_annulus_boundary():
    """Pilot (seeds 0-9): accuracy 0.976-0.982 for the label
    "within 0.1 h of the boundary"; rho-large points never sit deep inside."""
    M = make_manifold("annulus")
    cloud = M.sample_uniform(3000, seed=0)
    report, _, probes = calibrate_cloud(cloud)
    near = M.distance_to_boundary(cloud.points) <= 0.1 * report.h
    large = probes.radii >= report.rho
    assert np.mean(near == large) >= 0.95
    assert np.max(M.distance_to_boundary(cloud.points[large])) <= 0.05


def test_r_effective():
    v = r_effective(1000, 2, 0.5, 0.4, 0.84 * math.pi)
    ref = math.sqrt(0.2) * (0.84 * math.pi * math.log(1000) / (1000 * 0.25)) ** (1 / 3)
    assert v == pytest.approx(ref, rel=1e-14)
    with pytest.raises(InvalidParams):
        r_effective(1, 2, 0.5, 0.4, 1.0)
