"""Kernel catalog, Gram matrices, traces, and power kernels."""

import math

import numpy as np
import pytest

import widthlab as wl
from widthlab.errors import DegenerateDesignError, DomainError, TruncationError


class TestEvalKernel:
    def test_brownian_min(self, bm_kernel):
        assert wl.eval_kernel(bm_kernel, 0.3, 0.7) == 0.3

    def test_bridge_center(self, bridge_kernel):
        assert wl.eval_kernel(bridge_kernel, 0.5, 0.5) == 0.25

    def test_matern32_zero_distance(self):
        k = wl.make_kernel("matern32", length_scale=0.2)
        assert wl.eval_kernel(k, 0.4, 0.4) == 1.0

    def test_integrated_brownian_closed_form(self):
        k = wl.make_kernel("brownian_int")
        s, t = 0.3, 0.8
        assert wl.eval_kernel(k, s, t) == pytest.approx(s * s * t / 2 - s**3 / 6, abs=1e-15)

    def test_domain_error(self, bm_kernel):
        with pytest.raises(DomainError):
            wl.eval_kernel(bm_kernel, 1.5, 0.5)

    def test_symmetry_random_pairs(self, rng):
        for kid in wl.CATALOG_IDS:
            k = wl.make_kernel(kid)
            x = rng.random(1000)
            y = rng.random(1000)
            a = np.array([wl.eval_kernel(k, xi, yi) for xi, yi in zip(x[:50], y[:50])])
            b = np.array([wl.eval_kernel(k, yi, xi) for xi, yi in zip(x[:50], y[:50])])
            assert np.array_equal(a, b)
            # vectorized check over the full 1000 pairs
            K1 = k(x[:, None], y[:, None])
            K2 = k(y[:, None], x[:, None]).T
            assert np.array_equal(K1, K2)

    def test_diagonal_matches_pairwise(self, rng):
        for kid in wl.CATALOG_IDS:
            k = wl.make_kernel(kid)
            x = rng.random((64, 1))
            d1 = k.diag(x)
            d2 = np.array([wl.eval_kernel(k, xi, xi) for xi in x])
            np.testing.assert_allclose(d1, d2, rtol=0, atol=1e-15)


class TestGramMatrix:
    def test_single_point(self, bm_kernel):
        K = wl.gram_matrix(bm_kernel, [1.0])
        np.testing.assert_array_equal(K, [[1.0]])

    def test_two_points_entrywise(self, bm_kernel):
        K = wl.gram_matrix(bm_kernel, [0.5, 1.0])
        np.testing.assert_array_equal(K, [[0.5, 0.5], [0.5, 1.0]])

    def test_bridge_single(self, bridge_kernel):
        K = wl.gram_matrix(bridge_kernel, [0.5])
        np.testing.assert_array_equal(K, [[0.25]])

    def test_duplicate_points_rejected(self, bm_kernel):
        with pytest.raises(DegenerateDesignError):
            wl.gram_matrix(bm_kernel, [0.5, 0.5])

    def test_random_designs_psd(self, rng):
        for kid in wl.CATALOG_IDS:
            k = wl.make_kernel(kid)
            for n in (5, 20, 50):
                pts = rng.random((n, 1))
                K = wl.gram_matrix(k, pts)
                assert np.array_equal(K, K.T)
                eigs = np.linalg.eigvalsh(K)
                norm = np.linalg.norm(K, 2)
                assert eigs.min() >= -1e-10 * norm


class TestTraceIntegral:
    def test_brownian(self, bm_kernel, quad_2000):
        assert wl.trace_integral(bm_kernel, quad_2000) == pytest.approx(0.5, abs=1e-12)

    def test_bridge(self, bridge_kernel, quad_2000):
        assert wl.trace_integral(bridge_kernel, quad_2000) == pytest.approx(1.0 / 6.0, abs=1e-6)

    def test_matern_2d_unit_mass(self):
        k = wl.make_kernel("matern32", dim=2, length_scale=0.4)
        q = wl.midpoint_rule(k.domain, 64)
        assert wl.trace_integral(k, q) == pytest.approx(1.0, abs=1e-12)


@pytest.fixture(scope="module")
def bridge_expansion(bridge_analytic):
    return bridge_analytic.to_expansion()


class TestPowerKernel:

    def test_gamma_one_reproduces_bridge(self, bridge_expansion, bridge_kernel):
        spec = wl.PowerKernelSpec(bridge_expansion, gamma=1.0, n_terms=200)
        tail = 1.0 / 6.0 - sum(1.0 / (math.pi**2 * i**2) for i in range(1, 201))
        val = wl.power_kernel_eval(spec, 0.5, 0.5)
        assert abs(val - 0.25) <= 2.0 * tail

    def test_gamma_one_25_pairs(self, bridge_expansion, bridge_kernel, rng):
        spec = wl.PowerKernelSpec(bridge_expansion, gamma=1.0, n_terms=200)
        tail = 1.0 / 6.0 - sum(1.0 / (math.pi**2 * i**2) for i in range(1, 201))
        pts = rng.random((25, 2))
        for s, t in pts:
            val = wl.power_kernel_eval(spec, s, t)
            exact = wl.eval_kernel(bridge_kernel, s, t)
            assert abs(val - exact) <= 2.0 * tail

    def test_eigenfunction_zero_node(self, bridge_expansion):
        # e_2(t) = sqrt(2) sin(2 pi t) vanishes at t = 0.5: no second-mode term
        spec_full = wl.PowerKernelSpec(bridge_expansion, gamma=1.0, n_terms=2)
        spec_one = wl.PowerKernelSpec(bridge_expansion, gamma=1.0, n_terms=1)
        assert wl.power_kernel_eval(spec_full, 0.5, 0.5) == pytest.approx(
            wl.power_kernel_eval(spec_one, 0.5, 0.5), abs=1e-14
        )

    def test_gamma_two_brownian_trace(self, bm_analytic):
        exp = wl.analytic_spectrum("brownian", 500).to_expansion()
        spec = wl.PowerKernelSpec(exp, gamma=2.0, n_terms=500)
        # sum over odd integers of 16/(j^4 pi^4) = 1/6
        assert spec.trace() == pytest.approx(1.0 / 6.0, abs=1e-6)

    def test_truncated_trace_monotone_and_bounded(self, bm_analytic, bm_kernel, quad_2000):
        exp = bm_analytic.to_expansion()
        traces = [wl.PowerKernelSpec(exp, 1.0, n).trace() for n in (10, 50, 100, 260)]
        assert all(b >= a for a, b in zip(traces, traces[1:]))
        assert traces[-1] <= wl.trace_integral(bm_kernel, quad_2000) + 1e-12

    def test_gamma_one_error_nonincreasing_in_terms(self, bridge_expansion, bridge_kernel):
        x = np.array([0.3])
        exact = wl.eval_kernel(bridge_kernel, 0.3, 0.3)
        errs = []
        for n in (10, 40, 160):
            spec = wl.PowerKernelSpec(bridge_expansion, 1.0, n)
            errs.append(abs(wl.power_kernel_eval(spec, x, x) - exact))
        assert errs[0] >= errs[1] >= errs[2] - 1e-15

    def test_invalid_gamma(self, bridge_expansion):
        with pytest.raises(ValueError):
            wl.PowerKernelSpec(bridge_expansion, gamma=0.0, n_terms=10)

    def test_truncation_error(self, bridge_expansion):
        with pytest.raises(TruncationError):
            wl.PowerKernelSpec(bridge_expansion, gamma=1.0, n_terms=10_000)

    def test_power_kernel_as_kernel(self, bridge_expansion):
        spec = wl.PowerKernelSpec(bridge_expansion, gamma=1.5, n_terms=50)
        k = wl.power_kernel(spec)
        assert wl.eval_kernel(k, 0.3, 0.7) == pytest.approx(wl.power_kernel_eval(spec, 0.3, 0.7), abs=1e-14)
        K = wl.gram_matrix(k, [0.2, 0.4, 0.9])
        assert np.linalg.eigvalsh(K).min() >= -1e-12


class TestMercerExpansion:
    def test_orthonormality(self, bm_analytic):
        exp = bm_analytic.to_expansion(n_terms=50)
        assert exp.orthonormality_defect() < 1e-8

    def test_rejects_increasing_eigenvalues(self, bm_analytic):
        lam = np.array([0.1, 0.5])
        with pytest.raises(ValueError):
            wl.MercerExpansion(lam, lambda X: np.ones((len(X), 2)), 2, "analytic")
