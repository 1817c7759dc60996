"""Tests for the Gaussian quadrature rules and the doubling driver."""
import math

import numpy as np
import pytest
from scipy import integrate, special

from errors import ConvergenceError, DomainError
from quadrature import (gauss_jacobi01, gauss_laguerre, gauss_laguerre_split,
                        integrate_converged)
from specfun import dilog_inner, ln_gamma

pytestmark = pytest.mark.unit


def _beta_moment(k, p, q):
    return math.exp(ln_gamma(k + p + 1.0) + ln_gamma(q + 1.0) - ln_gamma(k + p + q + 2.0))


class TestGaussJacobi01:
    def test_midpoint(self):
        rule = gauss_jacobi01(1, 0, 0)
        np.testing.assert_allclose(rule.nodes, [0.5], rtol=1e-15)
        np.testing.assert_allclose(rule.weights, [1.0], rtol=1e-15)
        assert rule.exactness_degree == 1

    @pytest.mark.parametrize("n", [1, 3, 16, 64])
    @pytest.mark.parametrize("p,q", [(0, 0), (1, 2), (-0.5, 0.5), (3, 10)])
    def test_total_weight(self, n, p, q):
        rule = gauss_jacobi01(n, p, q)
        assert float(np.sum(rule.weights)) == pytest.approx(_beta_moment(0, p, q), rel=1e-13)

    def test_rational_integral(self):
        rule = gauss_jacobi01(16, 1, 2)
        assert rule.integrate(lambda u: u ** 3) == pytest.approx(1 / 105, abs=1e-15)

    @pytest.mark.parametrize("n", [2, 6, 16])
    @pytest.mark.parametrize("p,q", [(0, 0), (1, 2), (-0.5, 0.5), (2, 10)])
    def test_monomial_exactness(self, n, p, q):
        rule = gauss_jacobi01(n, p, q)
        for k in range(2 * n):
            exact = _beta_moment(k, p, q)
            assert rule.integrate(lambda u: u ** k) == pytest.approx(exact, rel=1e-12)

    @pytest.mark.parametrize("p,q", [(0.0, 0.0), (1.0, 2.0), (2.5, 7.0)])
    def test_matches_scipy_nodes(self, p, q):
        n = 20
        rule = gauss_jacobi01(n, p, q)
        x, w = special.roots_jacobi(n, p, q)
        order = np.argsort((1 - x) / 2)
        np.testing.assert_allclose(rule.nodes, ((1 - x) / 2)[order], rtol=1e-11)
        np.testing.assert_allclose(rule.weights, (w / 2 ** (p + q + 1))[order], rtol=1e-10)

    @pytest.mark.parametrize("n", [3, 7, 12])
    def test_nodes_interlace(self, n):
        small = gauss_jacobi01(n, 1, 2).nodes
        large = gauss_jacobi01(n + 1, 1, 2).nodes
        assert np.all(large[:-1] < small)
        assert np.all(small < large[1:])

    def test_nodes_inside_interval_and_weights_positive(self):
        rule = gauss_jacobi01(256, 0.0, 50.0)
        assert rule.nodes[0] > 0 and rule.nodes[-1] < 1
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.all(rule.weights > 0)

    def test_rule_is_cached_and_read_only(self):
        first = gauss_jacobi01(8, 1, 2)
        second = gauss_jacobi01(8, 1.0, 2.0)
        assert first.nodes is second.nodes
        with pytest.raises(ValueError):
            first.nodes[0] = 0.0
        with pytest.raises(ValueError):
            first.weights[0] = 0.0

    @pytest.mark.parametrize("n,p,q", [(0, 0, 0), (3, -1, 0), (3, 0, -1.5)])
    def test_domain(self, n, p, q):
        with pytest.raises(DomainError):
            gauss_jacobi01(n, p, q)


class TestGaussLaguerre:
    def test_single_node(self):
        rule = gauss_laguerre(1, 0)
        np.testing.assert_allclose(rule.nodes, [1.0], rtol=1e-15)
        np.testing.assert_allclose(rule.weights, [1.0], rtol=1e-15)

    @pytest.mark.parametrize("n", [1, 5, 32])
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 3.5])
    def test_total_weight(self, n, alpha):
        rule = gauss_laguerre(n, alpha)
        assert float(np.sum(rule.weights)) == pytest.approx(math.gamma(alpha + 1), rel=1e-13)

    def test_factorial_moment(self):
        rule = gauss_laguerre(16, 0)
        assert rule.integrate(lambda u: u ** 5) == pytest.approx(120.0, rel=1e-13)

    @pytest.mark.parametrize("alpha", [0.0, 1.5, 3.0])
    def test_monomial_exactness(self, alpha):
        rule = gauss_laguerre(4, alpha)
        for k in range(8):
            assert rule.integrate(lambda u: u ** k) == pytest.approx(math.gamma(k + alpha + 1), rel=1e-12)

    def test_matches_scipy_nodes(self):
        x, w = special.roots_genlaguerre(12, 2.0)
        rule = gauss_laguerre(12, 2.0)
        np.testing.assert_allclose(rule.nodes, x, rtol=1e-12)
        np.testing.assert_allclose(rule.weights, w, rtol=1e-9)

    def test_nodes_interlace(self):
        small = gauss_laguerre(9, 1.0).nodes
        large = gauss_laguerre(10, 1.0).nodes
        assert np.all(large[:-1] < small)
        assert np.all(small < large[1:])

    def test_large_rule_drops_underflowed_weights(self):
        rule = gauss_laguerre(1024, 0.0)
        assert 0 < rule.size <= 1024
        assert np.all(rule.weights > 0)
        assert float(np.sum(rule.weights)) == pytest.approx(1.0, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            gauss_laguerre(4, -1.0)


class TestLaguerreSplit:
    def test_shape(self):
        rule = gauss_laguerre_split(16, 1.0)
        assert rule.size == 32
        assert rule.exactness_degree is None
        assert rule.params == (1.0, 1.0)
        assert np.all(np.diff(rule.nodes) > 0)

    @pytest.mark.parametrize("alpha", [0.0, 2.0, 4.0])
    def test_total_weight(self, alpha):
        rule = gauss_laguerre_split(32, alpha)
        assert float(np.sum(rule.weights)) == pytest.approx(math.gamma(alpha + 1), rel=1e-12)

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    def test_log_integrand(self, c):
        alpha, rho = 2.0, 100.0
        exact, _ = integrate.quad(lambda u: u ** alpha * math.exp(-u) * math.log1p(rho * u),
                                  0, np.inf, epsabs=0, epsrel=1e-12, limit=200)
        rule = gauss_laguerre_split(128, alpha, c)
        assert rule.integrate(lambda u: np.log1p(rho * u)) == pytest.approx(exact, rel=1e-9)

    def test_bad_split_point(self):
        with pytest.raises(DomainError):
            gauss_laguerre_split(8, 0.0, c=0.0)


class TestIntegrateConverged:
    def test_polynomial_converges_at_first_doubling(self):
        result = integrate_converged(lambda n: gauss_jacobi01(n, 1, 2), lambda u: u ** 3, n0=4)
        assert result.n_used == 8
        assert result.achieved_rtol <= 1e-14
        assert result.value == pytest.approx(1 / 105, rel=1e-13)

    def test_dilog_integrand_is_stable(self):
        def f(u):
            return dilog_inner(3.0 * u)

        def factory(n):
            return gauss_jacobi01(n, 0.0, 1.0)

        result = integrate_converged(factory, f, rtol=1e-10)
        assert result.n_used <= 512
        again = factory(2 * result.n_used).integrate(f)
        assert again == pytest.approx(result.value, rel=1e-10)

    def test_failure_reports_last_values(self):
        with pytest.raises(ConvergenceError) as info:
            integrate_converged(lambda n: gauss_jacobi01(n, 0, 0), lambda u: np.sqrt(np.abs(u - 0.3)),
                                rtol=1e-14, n0=4, nmax=16)
        diag = info.value.diagnostics
        assert diag["N"] == 16
        assert diag["previous"] is not None
        assert diag["rtol"] == 1e-14
        assert info.value.method == "jacobi01"

    def test_records_rule_size(self, mocker):
        track = mocker.patch("quadrature.track_quadrature")
        integrate_converged(lambda n: gauss_laguerre(n, 0.0), lambda u: u, n0=2)
        track.assert_called_once_with("laguerre", 4)

    @pytest.mark.parametrize("kwargs", [{"rtol": 0.0}, {"rtol": -1e-3}, {"n0": 64, "nmax": 32}])
    def test_bad_arguments(self, kwargs):
        with pytest.raises(DomainError):
            integrate_converged(lambda n: gauss_jacobi01(n, 0, 0), lambda u: u, **kwargs)
