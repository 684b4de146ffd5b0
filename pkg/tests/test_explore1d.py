import math
from fractions import Fraction

import numpy as np
import pytest

from convexplore.convexfn import MaxAffineFunction, sum_functions
from convexplore.errors import DimensionMismatchError
from convexplore.explore1d import (ExplorationMeasure, PointMass,
                                   UniformSegment, build_measure_1d,
                                   dyadic_measure_1d, guarantee_threshold_1d,
                                   segment_gap_check, verify_exploration)
from convexplore.geometry import ConvexBody

from oracles import grid_event_mass_1d, segment_event_mass


def interval(lo=0.0, hi=1.0):
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    return ConvexBody(1, [[1.0], [-1.0]], [hi, -lo], [mid], half * 1.2)


def vee(center, level=0.0, slope=1.0):
    return MaxAffineFunction([level - slope * center, level + slope * center],
                             [[slope], [-slope]])


def test_dyadic_structure_at_eps_one_sixteenth():
    # N = ceil(log2 16) + 4 = 8: segments k=0..8 plus the atom, weight 1/10
    mu = build_measure_1d(interval(), vee(0.5), 1 / 16)
    assert len(mu.components) == 10
    assert all(w == Fraction(1, 10) for w in mu.weights)
    seg3 = mu.components[3]
    assert isinstance(seg3, UniformSegment)
    # endpoints inherit argmin's 1e-9 solver tolerance on x0
    assert abs(seg3.lo - 0.375) < 1e-7 and abs(seg3.hi - 0.625) < 1e-7
    assert isinstance(mu.components[-1], PointMass)


def test_dyadic_structure_at_eps_one():
    mu = build_measure_1d(interval(), vee(0.5), 1.0)
    assert len(mu.components) == 6  # N = 4
    assert all(w == Fraction(1, 6) for w in mu.weights)


def test_dyadic_clipping_at_boundary():
    mu = build_measure_1d(interval(), vee(0.0), 0.25)
    for comp in mu.components[:-1]:
        assert comp.lo >= -1e-12
        assert comp.hi <= 1 + 1e-12
        assert comp.lo <= 1e-12  # x0 = 0 end stays pinned


def test_dyadic_nesting():
    mu = dyadic_measure_1d(interval(), 0.3, 0.1)
    segs = [c for c in mu.components if isinstance(c, UniformSegment)]
    for a, b in zip(segs, segs[1:]):
        assert a.lo <= b.lo + 1e-12 and b.hi <= a.hi + 1e-12
        assert a.lo <= 0.3 <= a.hi


def test_dyadic_rejects_bad_eps():
    with pytest.raises(ValueError):
        dyadic_measure_1d(interval(), 0.5, 0.0)
    with pytest.raises(ValueError):
        dyadic_measure_1d(interval(), 0.5, 1.5)


def test_build_measure_dimension_gate():
    sq = ConvexBody(2, [[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 0, 1, 0],
                    [0.5, 0.5], 0.8)
    with pytest.raises(DimensionMismatchError):
        build_measure_1d(sq, MaxAffineFunction([0.0], [[1.0, 0.0]]), 0.1)


def test_sample_component_frequencies():
    mu = build_measure_1d(interval(), vee(0.5), 1 / 16)
    rng = np.random.default_rng(0)
    pts = mu.sample(100000, rng)
    # mass of the window [0.5 - 2^-8, 0.5 + 2^-8]: segment k overlaps with
    # fraction 2^(k-8), so p = (1/10)(sum_k 2^(k-8)) + 1/10 = 511/2560 + 0.1
    p = 511 / 2560 + 0.1
    inner = np.abs(pts.ravel() - 0.5) <= 2 ** -8 + 1e-12
    se = math.sqrt(p * (1 - p) / 100000)
    assert abs(inner.mean() - p) < 3 * se + 1e-3


def test_point_mass_only_measure():
    mu = ExplorationMeasure([Fraction(1)], [PointMass(np.array([0.3]))])
    pts = mu.sample(50, np.random.default_rng(1))
    assert np.allclose(pts, 0.3)


def test_zero_weight_component_never_sampled():
    mu = ExplorationMeasure([Fraction(1), Fraction(0)],
                            [UniformSegment(0.0, 0.5), UniformSegment(0.9, 1.0)])
    pts = mu.sample(2000, np.random.default_rng(2))
    assert pts.max() <= 0.5 + 1e-12


def test_event_probability_exact_atom():
    mu = ExplorationMeasure(
        [Fraction(9, 10), Fraction(1, 10)],
        [UniformSegment(0.0, 1.0), PointMass(np.array([2.0]))])
    p, lo, hi = mu.event_probability(
        lambda x: np.asarray(x).ravel() >= 2.0, 5000, np.random.default_rng(3))
    # the atom contributes exactly 0.1 with zero variance
    assert abs(p - 0.1) < 1e-12


def test_event_probability_uniform_quarter():
    mu = ExplorationMeasure([Fraction(1)], [UniformSegment(0.0, 1.0)])
    p, lo, hi = mu.event_probability(
        lambda x: np.asarray(x).ravel() < 0.25, 20000, np.random.default_rng(4))
    assert lo < 0.25 < hi


def test_guarantee_threshold_formula():
    assert abs(guarantee_threshold_1d(1 / 16)
               - 1 / (8 * math.log(17))) < 1e-15


def test_verify_exploration_constant_dip():
    # f = |x - 1/2|, g = -2eps constant; event mass from the dense-grid oracle
    eps = 1 / 16
    f = vee(0.5)
    g = MaxAffineFunction([-2 * eps], [[0.0]])
    mu = build_measure_1d(interval(), f, eps)
    rng = np.random.default_rng(5)
    rep = verify_exploration(mu, f, g, eps, 1 / 8,
                             guarantee_threshold_1d(eps), 50000, rng,
                             gap_scaling="eps")
    comps = [("atom", float(c.point[0])) if isinstance(c, PointMass)
             else ("segment", c.lo, c.hi) for c in mu.components]
    oracle = grid_event_mass_1d(
        mu.weights, comps,
        lambda x: np.abs(f.value(x) - g.value(x)) > eps / 8)
    assert abs(rep.p_hat - oracle) < 0.02
    assert rep.passed and rep.ci_low > rep.threshold


def test_verify_exploration_gap_zero_sees_everything():
    f = vee(0.5)
    g = vee(0.5, level=-0.1)
    mu = build_measure_1d(interval(), f, 0.25)
    rep = verify_exploration(mu, f, g, 0.25, 0.0, 0.5, 5000,
                             np.random.default_rng(6), gap_scaling="eps")
    assert rep.p_hat == 1.0


def test_verify_exploration_witness_check():
    f = vee(0.5)
    mu = build_measure_1d(interval(), f, 0.25)
    with pytest.raises(ValueError):
        verify_exploration(mu, f, f, 0.25, 1 / 8, 0.1, 2000,
                           np.random.default_rng(7), witness=np.array([1.0]))


def test_segment_gap_check_affine_crossing():
    # f == 0 on [0,1], g = x - 1 - 2eps; mass checked against the grid oracle
    eps = 0.1
    f = MaxAffineFunction([0.0], [[0.0]])
    g = MaxAffineFunction([-1.0 - 2 * eps], [[1.0]])
    mu = ExplorationMeasure([Fraction(1)], [UniformSegment(0.0, 1.0)])
    rep = segment_gap_check(f, g, 0.0, 1.0, mu, 1.0, eps, 20000,
                            np.random.default_rng(8))
    oracle = segment_event_mass(
        f, g, 0.0, 1.0,
        lambda x, fv: 0.25 * np.maximum(eps, fv))  # beta = 1
    assert rep.passed
    assert abs(rep.p_hat - oracle) < 0.02


def test_segment_gap_check_g_below_f_everywhere():
    # paper-style branch where g never crosses f: still at least half mass
    eps = 0.1
    f = MaxAffineFunction([0.1], [[0.0]])
    g = MaxAffineFunction([-0.15], [[-0.05]])  # stays below f, g(1) = -0.2
    mu = ExplorationMeasure([Fraction(1)], [UniformSegment(0.0, 1.0)])
    rep = segment_gap_check(f, g, 0.0, 1.0, mu, 1.0, eps, 20000,
                            np.random.default_rng(9))
    assert rep.passed


def test_segment_gap_check_rejects_small_beta():
    f = MaxAffineFunction([0.0], [[0.0]])
    g = MaxAffineFunction([-1.5], [[1.0]])
    mu = ExplorationMeasure([Fraction(1)], [UniformSegment(0.0, 1.0)])
    with pytest.raises(ValueError):
        segment_gap_check(f, g, 0.0, 1.0, mu, 0.5, 0.1, 2000,
                          np.random.default_rng(10))


def test_weights_sum_exactly_one():
    for eps in (1.0, 0.5, 0.25, 0.125, 1 / 64):
        mu = build_measure_1d(interval(), vee(0.4), eps)
        assert sum(mu.weights) == 1


def test_theorem_guarantee_seeded_sweep():
    # randomized mini-sweep of the 1-D guarantee at paper constants
    rng = np.random.default_rng(11)
    for trial in range(15):
        eps = float(rng.choice([0.25, 0.125, 0.0625]))
        f = vee(float(rng.uniform(0.2, 0.8)),
                level=float(rng.uniform(0, 0.2)),
                slope=float(rng.uniform(0.3, 1.0)))
        # pull f down so its minimum is 0 (guarantee normalizes f >= 0)
        f = f.add_constant(-float(f.value(np.array([rng.uniform(0, 1)]))))
        fmin = min(float(f.value(np.array([x]))) for x in np.linspace(0, 1, 2001))
        f = f.add_constant(-fmin)
        g = f.add_constant(-eps * float(rng.uniform(1.5, 3.0)))
        mu = build_measure_1d(interval(), f, eps)
        rep = verify_exploration(mu, f, g, eps, 1 / 8,
                                 guarantee_threshold_1d(eps), 20000,
                                 np.random.default_rng(100 + trial),
                                 gap_scaling="eps")
        assert rep.ci_low > rep.threshold, (trial, eps)
