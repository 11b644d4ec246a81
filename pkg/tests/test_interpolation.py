"""Cardinal weights, power function, greedy designs, width objectives."""

import math

import numpy as np
import pytest

import widthlab as wl
from widthlab.errors import DegenerateDesignError


INF = math.inf


class TestCardinalWeights:
    def test_single_point_half(self, bm_kernel):
        d = wl.design(bm_kernel, [1.0])
        np.testing.assert_allclose(wl.cardinal_weights(d, 0.5), [0.5], atol=1e-14)

    def test_two_point_solution(self, bm_kernel):
        # K = [[0.5, 0.5], [0.5, 1.0]], k_x = (0.25, 0.25) -> alpha = (0.5, 0)
        d = wl.design(bm_kernel, [0.5, 1.0])
        np.testing.assert_allclose(wl.cardinal_weights(d, 0.25), [0.5, 0.0], atol=1e-14)

    def test_unit_vector_at_design_points(self, rng):
        for kid in ("brownian", "bridge", "matern32"):
            k = wl.make_kernel(kid)
            pts = np.sort(rng.random(6) * 0.8 + 0.1)
            d = wl.design(k, pts)
            for j in range(6):
                w = wl.cardinal_weights(d, pts[j])
                np.testing.assert_allclose(w, np.eye(6)[j], atol=1e-7)

    def test_empty_design(self, bm_kernel):
        d = wl.design(bm_kernel, [])
        assert wl.cardinal_weights(d, 0.5).shape == (0,)


class TestApplyInterpolant:
    def test_zero_values(self, bm_kernel, rng):
        d = wl.design(bm_kernel, [0.2, 0.8])
        for x in rng.random(5):
            assert wl.apply_interpolant(d, [0.0, 0.0], x) == 0.0

    def test_cardinal_property(self, bm_kernel, rng):
        pts = [0.25, 0.5, 0.9]
        d = wl.design(bm_kernel, pts)
        f = rng.random(3)
        for j, x in enumerate(pts):
            assert wl.apply_interpolant(d, f, x) == pytest.approx(f[j], abs=1e-10)

    def test_brownian_half(self, bm_kernel):
        d = wl.design(bm_kernel, [1.0])
        assert wl.apply_interpolant(d, [1.0], 0.5) == pytest.approx(0.5, abs=1e-14)

    def test_length_mismatch(self, bm_kernel):
        d = wl.design(bm_kernel, [0.5, 1.0])
        with pytest.raises(ValueError):
            wl.apply_interpolant(d, [1.0], 0.5)

    def test_reproduction_random_fvalues(self, rng):
        k = wl.make_kernel("matern12")
        pts = np.linspace(0.1, 0.9, 8)
        d = wl.design(k, pts)
        f = rng.standard_normal(8)
        errs = [abs(wl.apply_interpolant(d, f, x) - fx) for x, fx in zip(pts, f)]
        assert max(errs) < 1e-10


class TestPowerFunction:
    def test_zero_at_design_points(self, bm_kernel):
        d = wl.design(bm_kernel, [0.3, 0.7])
        assert wl.power_function(d, 0.3) == pytest.approx(0.0, abs=1e-7)

    def test_brownian_midpoint(self, bm_kernel):
        d = wl.design(bm_kernel, [1.0])
        assert wl.power_function(d, 0.5) == pytest.approx(0.5, abs=1e-14)

    def test_brownian_extrapolation(self, bm_kernel):
        d = wl.design(bm_kernel, [0.8])
        assert wl.power_function(d, 1.0) == pytest.approx(math.sqrt(0.2), abs=1e-14)

    def test_bounds(self, rng):
        for kid in ("brownian", "bridge", "matern32"):
            k = wl.make_kernel(kid)
            d = wl.design(k, np.sort(rng.random(5) * 0.8 + 0.1))
            grid = k.domain.grid(512)
            vals = wl.power_values(d, grid)
            assert np.all(vals >= 0)
            assert np.all(vals <= np.sqrt(np.maximum(k.diag(grid), 0)) + 1e-12)

    def test_nested_monotonicity(self, bm_kernel):
        cand = bm_kernel.domain.grid(1025)
        grid = bm_kernel.domain.grid(512)
        full = wl.greedy_design(bm_kernel, cand, 16)
        prev = wl.power_values(wl.design(bm_kernel, full.points[:2]), grid)
        for n in (4, 8, 16):
            cur = wl.power_values(wl.design(bm_kernel, full.points[:n]), grid)
            assert np.all(cur <= prev + 1e-10)
            prev = cur

    def test_empty_design_convention(self, bridge_kernel):
        d = wl.design(bridge_kernel, [])
        grid = bridge_kernel.domain.grid(64)
        np.testing.assert_allclose(
            wl.power_values(d, grid), np.sqrt(np.maximum(bridge_kernel.diag(grid), 0.0)), atol=1e-15
        )

    def test_profile_node_defect(self, bm_kernel):
        d = wl.design(bm_kernel, [0.25, 0.5, 1.0])
        prof = wl.power_profile(d, bm_kernel.domain.grid(256))
        assert prof.node_defect() <= 0.0
        assert prof.sup_value == prof.values.max()


class TestGreedyDesign:
    def test_first_point_maximizes_diagonal(self, bm_kernel):
        d = wl.greedy_design(bm_kernel, bm_kernel.domain.grid(4097), 1)
        assert d.points[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_second_point_at_half(self, bm_kernel):
        # after D = (1.0): P^2(x) = x - x^2, maximized at x = 0.5
        d = wl.greedy_design(bm_kernel, bm_kernel.domain.grid(4097), 2)
        assert d.points[1, 0] == pytest.approx(0.5, abs=1e-12)

    def test_sup_path_nonincreasing(self, bridge_kernel):
        d = wl.greedy_design(bridge_kernel, bridge_kernel.domain.grid(1025), 32)
        path = d.greedy_sup_path
        assert path is not None and len(path) == 32
        assert np.all(np.diff(path) <= 1e-12)

    def test_sup_decreases_after_two(self, bm_kernel):
        d = wl.greedy_design(bm_kernel, bm_kernel.domain.grid(4097), 2)
        assert d.greedy_sup_path[1] < d.greedy_sup_path[0]

    def test_zero_points(self, bm_kernel):
        d = wl.greedy_design(bm_kernel, bm_kernel.domain.grid(65), 0)
        assert d.size == 0

    def test_too_many_points(self, bm_kernel):
        with pytest.raises(ValueError):
            wl.greedy_design(bm_kernel, bm_kernel.domain.grid(5), 6)

    def test_deterministic(self, bridge_kernel):
        cand = bridge_kernel.domain.grid(513)
        d1 = wl.greedy_design(bridge_kernel, cand, 10)
        d2 = wl.greedy_design(bridge_kernel, cand, 10)
        np.testing.assert_array_equal(d1.points, d2.points)


class TestInterpolationWidth:
    def test_uniform_grid_closed_form(self, bm_kernel, quad_2000):
        # on the grid (i/n) the sup of the power function is 1/(2 sqrt n)
        for n in (4, 16, 64):
            d = wl.uniform_design(bm_kernel, n)
            val = wl.interpolation_width(d, quad_2000, INF)
            assert val == pytest.approx(1.0 / (2.0 * math.sqrt(n)), abs=1e-4)

    def test_design_covering_grid_gives_zero(self, bm_kernel, quad_2000):
        grid = np.linspace(0.1, 1.0, 9)[:, None]
        d = wl.design(bm_kernel, grid)
        assert wl.interpolation_width(d, quad_2000, INF, eval_grid=grid) < 1e-6

    def test_monotone_in_p(self, bm_kernel, quad_2000):
        d = wl.uniform_design(bm_kernel, 8)
        v2 = wl.interpolation_width(d, quad_2000, 2.0)
        v4 = wl.interpolation_width(d, quad_2000, 4.0)
        vi = wl.interpolation_width(d, quad_2000, INF)
        assert v2 <= v4 + 1e-12 <= vi + 1e-9

    def test_invalid_p(self, bm_kernel, quad_2000):
        d = wl.uniform_design(bm_kernel, 4)
        with pytest.raises(ValueError):
            wl.interpolation_width(d, quad_2000, 1.5)

    def test_tail_lower_bound_never_violated(self, bm_analytic, bridge_analytic, quad_2000):
        # sqrt(tail(n)) <= sup-norm width value at any n-point design
        for kid, spectrum in (("brownian", bm_analytic), ("bridge", bridge_analytic)):
            k = wl.make_kernel(kid)
            cand = k.domain.grid(1025)
            full = wl.greedy_design(k, cand, 64)
            for n in (1, 2, 4, 8, 16, 32, 64):
                lower = math.sqrt(wl.tail_sum(spectrum, n))
                for d in (wl.design(k, full.points[:n]), wl.uniform_design(k, n)):
                    val = wl.interpolation_width(d, quad_2000, INF)
                    assert lower <= val + 1e-6, (kid, n, lower, val)


class TestOptimize:
    def test_single_point_optimum(self, bm_kernel, quad_2000):
        des, val = wl.optimize_interpolation_width(bm_kernel, quad_2000, INF, 1, strategy="multistart", seed=7)
        assert 0.44721 <= val <= 0.4473
        assert des.points[0, 0] == pytest.approx(0.8, abs=1e-3)

    def test_uniform_strategy_n4(self, bm_kernel, quad_2000):
        _, val = wl.optimize_interpolation_width(bm_kernel, quad_2000, INF, 4, strategy="uniform")
        assert val == pytest.approx(0.25, abs=1e-4)

    def test_multistart_dominates_uniform(self, bm_kernel, quad_2000):
        _, vu = wl.optimize_interpolation_width(bm_kernel, quad_2000, INF, 4, strategy="uniform")
        _, vm = wl.optimize_interpolation_width(bm_kernel, quad_2000, INF, 4, strategy="multistart", seed=3)
        assert vm <= vu + 1e-12

    def test_greedy_strategy(self, bm_kernel, quad_2000):
        des, val = wl.optimize_interpolation_width(bm_kernel, quad_2000, INF, 8, strategy="greedy")
        assert des.size == 8
        assert val == pytest.approx(1.0 / (2.0 * math.sqrt(8)), rel=1e-3)

    def test_unknown_strategy(self, bm_kernel, quad_2000):
        with pytest.raises(ValueError):
            wl.optimize_interpolation_width(bm_kernel, quad_2000, INF, 2, strategy="annealing")

    def test_n_zero_rejected(self, bm_kernel, quad_2000):
        with pytest.raises(ValueError):
            wl.optimize_interpolation_width(bm_kernel, quad_2000, INF, 0)


class TestDesignSet:
    def test_duplicate_points(self, bm_kernel):
        with pytest.raises(DegenerateDesignError):
            wl.design(bm_kernel, [0.5, 0.5])

    def test_jitter_recorded_for_singular_gram(self, bridge_kernel):
        # bridge kernel vanishes at the endpoints; including x = 1 gives a zero row
        d = wl.design(bridge_kernel, [0.5, 1.0])
        assert d.jitter > 0

    def test_clean_design_no_jitter(self, bm_kernel):
        d = wl.design(bm_kernel, [0.25, 0.5, 1.0])
        assert d.jitter == 0.0
