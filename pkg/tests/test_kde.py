"""KDE density values, LOO cross-entropy, and bandwidth selection oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmnbr.kde import (
    DENSITY_FLOOR,
    Kde1,
    Kde2,
    default_grid,
    loo_cross_entropy1,
    loo_cross_entropy2,
    select_bandwidth1,
    select_bandwidth2,
    silverman_bandwidth,
)


def normal_pdf(z, h=1.0):
    return math.exp(-0.5 * (z / h) ** 2) / (h * math.sqrt(2 * math.pi))


def brute_density1(points, h, y):
    return sum(normal_pdf(y - p, h) for p in points) / len(points)


def brute_density2(xs, ys, hx, hy, x, y):
    return sum(
        normal_pdf(x - a, hx) * normal_pdf(y - b, hy) for a, b in zip(xs, ys)
    ) / len(xs)


def brute_loo_ce1(points, h):
    total = 0.0
    for i in range(len(points)):
        rest = [p for j, p in enumerate(points) if j != i]
        total -= math.log(max(brute_density1(rest, h, points[i]), DENSITY_FLOOR))
    return total


def brute_loo_ce2(xs, ys, hx, hy):
    total = 0.0
    for i in range(len(xs)):
        rx = [p for j, p in enumerate(xs) if j != i]
        ry = [p for j, p in enumerate(ys) if j != i]
        total -= math.log(max(brute_density2(rx, ry, hx, hy, xs[i], ys[i]), DENSITY_FLOOR))
    return total


class TestDensity1:
    def test_single_point_peak(self):
        assert Kde1([0.0], 1.0).density(0.0) == pytest.approx(0.3989423, abs=1e-7)

    def test_single_point_unit_offset(self):
        assert Kde1([0.0], 1.0).density(1.0) == pytest.approx(0.2419707, abs=1e-7)

    def test_two_point_average(self):
        # both points are one unit away, so the average equals the unit-offset pdf
        assert Kde1([0.0, 2.0], 1.0).density(1.0) == pytest.approx(0.2419707, abs=1e-7)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(7)
        pts = rng.normal(size=13)
        k = Kde1(pts, 0.7)
        for q in [-2.0, 0.1, 3.5]:
            assert k.density(q) == pytest.approx(brute_density1(list(pts), 0.7, q), rel=1e-12)

    def test_vectorised_queries(self):
        k = Kde1([0.0, 1.0], 0.5)
        qs = np.array([-1.0, 0.0, 2.0])
        assert np.allclose(k.density(qs), [k.density(q) for q in qs])

    def test_log_density_agrees(self):
        k = Kde1([0.0, 1.0], 0.5)
        assert k.log_density(0.3) == pytest.approx(math.log(k.density(0.3)))

    def test_log_density_floored(self):
        k = Kde1([0.0], 1e-3)
        assert k.log_density(1e6) == pytest.approx(math.log(DENSITY_FLOOR))

    def test_integrates_to_one(self):
        rng = np.random.default_rng(3)
        for n in (2, 17, 50):
            pts = rng.normal(scale=2.0, size=n)
            h = 0.8
            k = Kde1(pts, h)
            lo, hi = pts.min() - 8 * h, pts.max() + 8 * h
            grid = np.linspace(lo, hi, 10_000)
            integral = np.trapezoid(k.density(grid), grid)
            assert integral == pytest.approx(1.0, abs=1e-3)

    def test_rejects_empty_and_bad_bandwidth(self):
        with pytest.raises(ValueError):
            Kde1([], 1.0)
        with pytest.raises(ValueError):
            Kde1([0.0], 0.0)

    @given(
        st.lists(st.floats(-50, 50), min_size=1, max_size=20),
        st.floats(0.01, 10),
        st.floats(-60, 60),
    )
    @settings(max_examples=50, deadline=None)
    def test_nonnegative(self, pts, h, q):
        assert Kde1(pts, h).density(q) >= 0.0


class TestDensity2:
    def test_single_point_peak(self):
        k = Kde2([0.0], [0.0], 1.0, 1.0)
        assert k.density(0.0, 0.0) == pytest.approx(1.0 / (2 * math.pi), abs=1e-9)

    def test_point_symmetry(self):
        k = Kde2([0.0], [0.0], 1.3, 0.7)
        for a, b in [(0.5, -0.2), (1.0, 1.0), (-2.0, 0.3)]:
            assert k.density(a, b) == pytest.approx(k.density(-a, -b), rel=1e-12)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        xs, ys = rng.normal(size=9), rng.normal(size=9)
        k = Kde2(xs, ys, 0.6, 1.1)
        for qx, qy in [(-1.0, 0.5), (0.0, 0.0), (2.0, -2.0)]:
            expect = brute_density2(list(xs), list(ys), 0.6, 1.1, qx, qy)
            assert k.density(qx, qy) == pytest.approx(expect, rel=1e-12)


class TestLooCrossEntropy:
    def test_two_distinct_points(self):
        # each leave-one-out density is the unit-offset pdf: -2 log(0.2419707)
        assert loo_cross_entropy1([0.0, 1.0], 1.0) == pytest.approx(2.8379, abs=1e-4)

    def test_duplicated_points(self):
        # leave-one-out density is the peak value: -2 log(0.3989423)
        assert loo_cross_entropy1([0.0, 0.0], 1.0) == pytest.approx(1.8379, abs=1e-4)

    def test_finite_when_underflowing(self):
        value = loo_cross_entropy1([0.0, 1e9], 1e-3)
        assert math.isfinite(value)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        pts = list(rng.normal(size=8))
        for h in (0.2, 1.0, 4.0):
            assert loo_cross_entropy1(pts, h) == pytest.approx(brute_loo_ce1(pts, h), rel=1e-10)

    def test_bivariate_matches_brute_force(self):
        rng = np.random.default_rng(6)
        xs, ys = list(rng.normal(size=7)), list(rng.normal(size=7))
        for hx, hy in [(0.3, 0.5), (1.0, 2.0)]:
            expect = brute_loo_ce2(xs, ys, hx, hy)
            assert loo_cross_entropy2(xs, ys, hx, hy) == pytest.approx(expect, rel=1e-10)

    def test_requires_two_points(self):
        with pytest.raises(ValueError):
            loo_cross_entropy1([0.0], 1.0)


class TestSelectBandwidth1:
    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            pts = rng.normal(size=10)
            grid = default_grid(pts)
            h, score = select_bandwidth1(pts, grid)
            oracle = [loo_cross_entropy1(pts, g) for g in grid]
            assert h == grid[int(np.argmin(oracle))]
            assert score == pytest.approx(min(oracle), rel=1e-12)

    def test_single_value_grid(self):
        h, _ = select_bandwidth1([0.0, 1.0, 2.0], [0.5])
        assert h == 0.5

    def test_score_recomputes(self):
        pts = np.arange(6.0)
        grid = default_grid(pts)
        h, score = select_bandwidth1(pts, grid)
        assert h in grid
        assert score == loo_cross_entropy1(pts, h)

    def test_near_silverman_on_gaussian_sample(self):
        pts = np.random.default_rng(0).normal(size=200)
        h, _ = select_bandwidth1(pts, default_grid(pts))
        reference = 1.06 * np.std(pts, ddof=1) * 200 ** (-0.2)
        assert reference / 3 <= h <= reference * 3

    def test_tie_breaks_to_smaller(self):
        # two points so far apart that every candidate floors out, giving a
        # constant objective: the first (smallest) grid member must win
        pts = [0.0, 1e9]
        grid = np.array([1e-6, 2e-6])
        h, _ = select_bandwidth1(pts, grid)
        assert h == 1e-6

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            select_bandwidth1([0.0, 1.0], [])
        with pytest.raises(ValueError):
            select_bandwidth1([0.0, 1.0], [2.0, 1.0])
        with pytest.raises(ValueError):
            select_bandwidth1([0.0, 1.0], [-1.0, 1.0])


class TestSelectBandwidth2:
    def test_one_by_one_grid(self):
        h_x, h_y, _ = select_bandwidth2([0.0, 1.0], [0.0, 1.0], [0.4], [0.9])
        assert (h_x, h_y) == (0.4, 0.9)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(3):
            xs, ys = rng.normal(size=8), rng.normal(size=8)
            gx, gy = default_grid(xs, 6), default_grid(ys, 6)
            h_x, h_y, score = select_bandwidth2(xs, ys, gx, gy)
            best = (math.inf, None, None)
            for a in gx:
                for b in gy:
                    ce = brute_loo_ce2(list(xs), list(ys), a, b)
                    if ce < best[0]:
                        best = (ce, a, b)
            assert (h_x, h_y) == (best[1], best[2])
            assert score == pytest.approx(best[0], rel=1e-10)

    def test_constant_x_factorises(self):
        # with a constant x column the joint objective is the univariate one
        # shifted by a constant, so the selected target bandwidth matches
        rng = np.random.default_rng(2)
        ys = rng.normal(size=12)
        xs = np.zeros(12)
        gy = default_grid(ys)
        h1, _ = select_bandwidth1(ys, gy)
        _, h_y, _ = select_bandwidth2(xs, ys, [0.5], gy)
        assert h_y == h1


def test_silverman_bandwidth_formula():
    pts = np.arange(10.0)
    expect = 1.06 * np.std(pts, ddof=1) * 10 ** (-0.2)
    assert silverman_bandwidth(pts) == pytest.approx(expect, rel=1e-12)


def test_silverman_bandwidth_floors_sigma():
    assert silverman_bandwidth([3.0, 3.0, 3.0]) == pytest.approx(1.06e-6 * 3 ** (-0.2))


def test_default_grid_is_strictly_increasing_and_positive():
    grid = default_grid(np.arange(20.0))
    assert np.all(grid > 0)
    assert np.all(np.diff(grid) > 0)
    assert len(grid) == 20
