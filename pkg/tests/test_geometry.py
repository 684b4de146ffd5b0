import math

import numpy as np
import pytest

from convexplore.errors import (DimensionMismatchError, FlatBodyError,
                                InfeasibleBodyError)
from convexplore.geometry import (AffineMap, ConvexBody, affine_image,
                                  diameter_certificates, slab, thinnest_slab,
                                  volume_ratio, whitening_map)

from oracles import ball_coordinate_second_moment, disk_slab_area_ratio


def box2():
    return ConvexBody(2, [[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 1, 1, 1],
                      [0, 0], 1.5)


def unit_disk():
    return ConvexBody(2, ball_center=[0.0, 0.0], ball_radius=1.0)


def interval(lo=0.0, hi=1.0):
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    return ConvexBody(1, [[1.0], [-1.0]], [hi, -lo], [mid], half * 1.2)


def test_contains_basic():
    b = box2()
    assert b.contains(np.array([0.0, 0.0]))
    assert not b.contains(np.array([2.0, 0.0]))
    with pytest.raises(DimensionMismatchError):
        b.contains(np.array([0.0, 0.0, 0.0]))


def test_sample_uniform_always_inside():
    rng = np.random.default_rng(0)
    for body in (interval(), box2(), unit_disk(),
                 ConvexBody(2, [[1, 1], [-1, 0], [0, -1]], [1, 0, 0],
                            [0.3, 0.3], 1.0)):
        pts = body.sample_uniform(500, rng)
        assert body.contains(pts).all()


def test_interval_sampler_exact_bounds():
    rng = np.random.default_rng(1)
    pts = interval().sample_uniform(5000, rng)
    assert pts.min() >= 0 and pts.max() <= 1
    assert abs(pts.mean() - 0.5) < 0.02


def test_disk_sample_mean_near_origin():
    rng = np.random.default_rng(2)
    pts = unit_disk().sample_uniform(20000, rng)
    # CLT bound 3 sigma with per-coordinate variance 1/4
    assert np.all(np.abs(pts.mean(axis=0)) < 3 * 0.5 / math.sqrt(20000) + 0.01)


def test_disk_second_moment_matches_quadrature_oracle():
    rng = np.random.default_rng(3)
    mom = unit_disk().estimate_moments(40000, rng)
    # radial-quadrature oracle: E x_i^2 = r^2/(n+2) = 0.25 for the unit disk
    expected = ball_coordinate_second_moment(2, 1.0)
    assert abs(expected - 0.25) < 1e-12
    assert np.allclose(np.diag(mom.covariance), expected, atol=0.01)
    assert abs(mom.covariance[0, 1]) < 0.01


def test_interval_variance():
    rng = np.random.default_rng(4)
    mom = interval().estimate_moments(200000, rng)
    assert abs(mom.covariance[0, 0] - 1 / 12) < 0.001


def test_flat_body_rejected():
    flat = ConvexBody(2, [[1, 0], [-1, 0], [0, 1], [0, -1]],
                      [1, 1, 1e-12, 1e-12], [0, 0], 1.5)
    with pytest.raises(FlatBodyError):
        flat.estimate_moments(500, np.random.default_rng(5))


def test_whitening_map_diagonal():
    from convexplore.geometry import MomentEstimate
    mom = MomentEstimate(np.zeros(2), np.diag([4.0, 1.0]), 1000, 1 / math.sqrt(1000))
    W = whitening_map(mom)
    assert np.allclose(W.matrix, np.diag([0.5, 1.0]))
    assert np.allclose(W.offset, 0)


def test_whitening_floor_warns():
    from convexplore.geometry import MomentEstimate
    mom = MomentEstimate(np.zeros(2), np.diag([1.0, 1e-12]), 1000, 0.03)
    with pytest.warns(UserWarning):
        W = whitening_map(mom)
    assert np.isfinite(W.matrix).all()


def test_whitened_body_isotropic():
    rng = np.random.default_rng(6)
    body = ConvexBody(2, [[1, 0], [-1, 0], [0, 1], [0, -1]],
                      [4, 4, 0.5, 0.5], [0, 0], 4.2)
    m = 40000
    mom = body.estimate_moments(m, rng)
    white = affine_image(body, whitening_map(mom))
    mom2 = white.estimate_moments(m, rng)
    eig = np.linalg.eigvalsh(mom2.covariance)
    tol = 5 * 2 / math.sqrt(m) + 0.02
    assert np.all(eig > 1 - tol) and np.all(eig < 1 + tol)


def test_diameter_certificate_whitened():
    # Exact-moment oracle (interval, square, disk) shows the raw bound
    # diam <= (n+1) sigma_max^(1/2) fails by ~2x (whitened interval has
    # diam 2*sqrt(3) > 2), so the certificate asserts the circumradius form
    # diam <= 2(n+1) sigma_max^(1/2).
    assert 2 * math.sqrt(3) > 2  # the raw form is impossible even exactly
    rng = np.random.default_rng(7)
    for body in (interval(), box2()):
        mom = body.estimate_moments(30000, rng)
        white = affine_image(body, whitening_map(mom))
        mom2 = white.estimate_moments(30000, rng)
        cert = diameter_certificates(white, mom2)
        n = body.dimension
        assert cert.diam_estimate <= 2 * (n + 1) * (1 + 5 * mom2.stderr_scale)
        assert cert.diam_estimate <= cert.diam_upper * (1 + 5 * mom2.stderr_scale)


def test_slab_and_volume_ratio_lens():
    rng = np.random.default_rng(8)
    disk = unit_disk()
    lens = slab(disk, np.array([1.0, 0.0]), 0.25)
    assert lens.contains(np.array([0.2, 0.5]))
    assert not lens.contains(np.array([0.3, 0.0]))
    ratio, lo, hi = volume_ratio(lens, disk, 40000, rng)
    exact = disk_slab_area_ratio(0.25)  # 2-D quadrature oracle
    assert lo < exact < hi
    assert hi < 0.5  # strict halving for the 1/4-slab of the disk


def test_volume_ratio_self_is_one():
    rng = np.random.default_rng(9)
    b = box2()
    ratio, lo, hi = volume_ratio(b, b, 2000, rng)
    assert ratio == 1.0


def test_volume_ratio_containment_error():
    rng = np.random.default_rng(10)
    shifted = ConvexBody(2, [[1, 0], [-1, 0], [0, 1], [0, -1]],
                         [5, -3, 1, 1], [4, 0], 2.0)
    with pytest.raises(ValueError):
        volume_ratio(shifted, box2(), 2000, rng)


def test_support_function_box_and_disk():
    b = box2()
    assert abs(b.support_function(np.array([1.0, 0.0])) - 1) < 1e-9
    d = np.array([1.0, 1.0]) / math.sqrt(2)
    assert abs(b.support_function(d) - math.sqrt(2)) < 1e-9
    disk = unit_disk()
    assert abs(disk.support_function(np.array([0.6, 0.8])) - 1) < 1e-6


def test_support_function_sublinear():
    rng = np.random.default_rng(11)
    b = ConvexBody(2, [[1, 1], [-1, 0.5], [0, -1]], [1.0, 0.8, 0.6],
                   [0.1, 0.0], 2.0)
    for _ in range(25):
        u, v = rng.standard_normal(2), rng.standard_normal(2)
        assert (b.support_function(u + v)
                <= b.support_function(u) + b.support_function(v) + 1e-7)


def test_slab_contained_in_body():
    rng = np.random.default_rng(12)
    b = box2()
    s = slab(b, np.array([0.6, 0.8]), 0.3)
    pts = s.sample_uniform(300, rng)
    assert b.contains(pts).all()


def test_slab_wide_is_whole_body():
    b = unit_disk()
    s = slab(b, np.array([1.0, 0.0]), 2.0)
    rng = np.random.default_rng(13)
    pts = b.sample_uniform(500, rng)
    assert s.contains(pts).all()


def test_thinnest_slab_of_flat_box():
    b = ConvexBody(2, [[1, 0], [-1, 0], [0, 1], [0, -1]],
                   [1, 1, 0.2, 0.2], [0, 0], 1.2)
    v, hw = thinnest_slab(b)
    assert abs(hw - 0.2) < 1e-6
    assert abs(abs(v[1]) - 1) < 1e-6


def test_affine_image_of_square():
    b = box2()
    img = affine_image(b, AffineMap([[2, 0], [0, 1]], [1, 0]))
    assert img.contains(np.array([2.9, 0.5]))
    assert not img.contains(np.array([3.1, 0.0]))
    assert not img.contains(np.array([-1.1, 0.0]))


def test_largest_inscribed_ball_triangle():
    # right triangle with legs 3 and 4: inradius = (3+4-5)/2 = 1
    tri = ConvexBody(2, [[-1, 0], [0, -1], [4 / 5, 3 / 5]], [0, 0, 12 / 5],
                     [1.0, 1.0], 3.0)
    c, r = tri.largest_inscribed_ball()
    assert abs(r - 1.0) < 1e-6
    assert np.allclose(c, [1.0, 1.0], atol=1e-5)


def test_infeasible_body():
    with pytest.raises(InfeasibleBodyError):
        ConvexBody(1, [[1.0], [-1.0]], [0.0, -1.0], [0.5],
                   1.0).largest_inscribed_ball()
