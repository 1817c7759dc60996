"""Tests for the Jacobi-channel capacity routes."""
import logging
import math

import numpy as np
import pytest
from scipy import integrate

from channel import ChannelDims, Method, Snr, SnrScaling
from errors import DimensionError, DomainError
from jacobi_capacity import (JacobiParams, capacity_cd_reference, capacity_decomposed,
                             capacity_moment_series, capacity_regrouped_series, capacity_theorem1,
                             const_A, const_B, ergodic_capacity, jacobi_params, joint_density,
                             prop1_rhs, selberg_log_norm, trace_moments)
from selftest import rho_second_operator
from specfun import HypergeometricArgs, gauss_2f1, ln_gamma


def _beta_log_integral(a, b, rho):
    """E ln(1 + rho l) for l ~ Beta(a, b)."""
    log_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
    value, _ = integrate.quad(
        lambda l: math.log1p(rho * l) * l ** (a - 1) * (1 - l) ** (b - 1) * math.exp(-log_beta),
        0, 1, epsabs=0, epsrel=1e-13, limit=200)
    return value


SERIES_PARAMS = [
    JacobiParams(1.0, 19.0, 1),
    JacobiParams(1.0, 17.0, 2),
    JacobiParams(2.0, 6.0, 2),
    JacobiParams(1.0, 3.0, 2),
    JacobiParams(3.0, 8.0, 3),
    JacobiParams(1.0, 5.0, 4),
]


@pytest.mark.unit
class TestParameterMap:
    @pytest.mark.parametrize("dims,expected", [
        ((20, 4, 4), (1, 13, 4)),
        ((25, 3, 6), (4, 17, 3)),
        ((10, 6, 2), (5, 3, 2)),
    ])
    def test_examples(self, dims, expected):
        p = jacobi_params(ChannelDims(*dims))
        assert (p.a, p.b, p.n) == expected

    def test_swap_keeps_transmit_count(self):
        p = jacobi_params(ChannelDims(10, 6, 2))
        assert p.m_t == 6
        assert p.transmit == 6
        assert JacobiParams(2.0, 3.0, 2).transmit == 2

    def test_needs_decomposition(self):
        with pytest.raises(DimensionError):
            jacobi_params(ChannelDims(5, 3, 3))

    @pytest.mark.parametrize("a,b,n", [(0.0, 2.0, 1), (1.0, -1.0, 1), (1.0, 2.0, 0)])
    def test_invalid(self, a, b, n):
        with pytest.raises(DomainError):
            JacobiParams(a, b, n)


@pytest.mark.unit
class TestConstants:
    def test_const_a_single_eigenvalue(self):
        assert const_A(JacobiParams(1, 2, 1)) == pytest.approx(1 / 3, rel=1e-14)
        for a, b in [(2.0, 5.0), (0.5, 1.5), (7.0, 3.0)]:
            assert const_A(JacobiParams(a, b, 1)) == pytest.approx(a / (a + b), rel=1e-14)

    def test_const_a_two_eigenvalues(self):
        assert const_A(JacobiParams(2, 2, 2)) == pytest.approx(1 / 5, rel=1e-14)

    @pytest.mark.parametrize("a,b,n,expected", [(2, 2, 1, 6.0), (1, 2, 2, 6.0)])
    def test_const_b(self, a, b, n, expected):
        assert const_B(JacobiParams(a, b, n)) == pytest.approx(expected, rel=1e-14)

    def test_const_b_large_b_scaling(self):
        a, n, b = 2.0, 3, 1e6
        limit = math.factorial(n) / math.gamma(a + n - 1)
        assert const_B(JacobiParams(a, b, n)) / b ** a == pytest.approx(limit, rel=1e-4)

    def test_selberg_trivial(self):
        assert selberg_log_norm(JacobiParams(1, 1, 1)) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("a,b", [(1.0, 2.0), (2.5, 4.0), (6.0, 1.0)])
    def test_selberg_single_eigenvalue_is_beta(self, a, b):
        expected = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
        assert selberg_log_norm(JacobiParams(a, b, 1)) == pytest.approx(expected, rel=1e-13, abs=1e-14)


@pytest.mark.unit
class TestJointDensity:
    def test_uniform(self):
        assert joint_density(JacobiParams(1, 1, 1), [0.37]) == pytest.approx(1.0, rel=1e-14)

    def test_single_eigenvalue_is_beta_density(self):
        lam = 0.3
        expected = lam * (1 - lam) ** 2 / math.exp(ln_gamma(2) + ln_gamma(3) - ln_gamma(5))
        assert joint_density(JacobiParams(2, 3, 1), [lam]) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("a,b", [(1, 1), (2, 3)])
    def test_integrates_to_one(self, a, b):
        p = JacobiParams(a, b, 2)
        total, _ = integrate.dblquad(lambda l2, l1: joint_density(p, [l1, l2]),
                                     0, 1, lambda l1: l1, lambda l1: 1, epsabs=1e-10, epsrel=1e-10)
        assert total == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("lambdas", [[0.5, 0.2], [0.3, 0.3], [0.0, 0.5], [0.5, 1.0]])
    def test_ordering_enforced(self, lambdas):
        with pytest.raises(DomainError):
            joint_density(JacobiParams(1, 1, 2), lambdas)

    def test_wrong_count(self):
        with pytest.raises(DimensionError):
            joint_density(JacobiParams(1, 1, 2), [0.5])


@pytest.mark.unit
class TestTheorem1:
    def test_zero_snr(self):
        est = capacity_theorem1(JacobiParams(1, 13, 4), Snr(0.0))
        assert est.nats == 0.0
        assert est.method is Method.THEOREM1

    @pytest.mark.parametrize("rho", [0.5, 1.0, 10.0, 1000.0])
    def test_single_eigenvalue(self, rho, tight_rtol):
        # m=3, m_t=m_r=1: the eigenvalue is Beta(1, 2)
        p = jacobi_params(ChannelDims(3, 1, 1))
        est = capacity_theorem1(p, Snr(rho), tight_rtol)
        assert est.nats == pytest.approx(_beta_log_integral(1, 2, rho), rel=1e-10)

    def test_real_parameters(self, tight_rtol):
        p = JacobiParams(1.5, 2.5, 1)
        est = capacity_theorem1(p, Snr(2.0), tight_rtol)
        assert est.nats == pytest.approx(_beta_log_integral(1.5, 2.5, 2.0), rel=1e-10)

    def test_meta(self):
        est = capacity_theorem1(JacobiParams(1, 13, 4), Snr(10.0))
        assert est.meta["err_kind"] == "relative"
        assert est.meta["scaling"] == "per_mode"
        assert est.meta["rho_eff"] == 10.0
        assert (est.meta["a"], est.meta["b"], est.meta["n"]) == (1, 13, 4)
        assert 0 < est.meta["N_used"] <= 512
        assert est.err <= 1e-10

    def test_needs_b_above_one(self):
        with pytest.raises(DomainError):
            capacity_theorem1(JacobiParams(1, 1, 2), Snr(1.0))

    def test_increasing_in_snr(self):
        p = jacobi_params(ChannelDims(20, 2, 2))
        values = [capacity_theorem1(p, Snr(rho)).nats for rho in np.logspace(-2, 3, 20)]
        assert all(later > earlier for earlier, later in zip(values, values[1:]))

    @pytest.mark.parametrize("m_t", [2, 3])
    def test_increasing_and_concave_in_receive_modes(self, m_t):
        values = [ergodic_capacity(ChannelDims(25, m_t, m_r), Snr(10.0)).nats for m_r in range(m_t, 11)]
        steps = np.diff(values)
        assert np.all(steps > 0)
        assert np.all(np.diff(steps) < 0)

    def test_symmetric_under_per_mode(self):
        forward = ergodic_capacity(ChannelDims(20, 2, 5), Snr(10.0)).nats
        backward = ergodic_capacity(ChannelDims(20, 5, 2), Snr(10.0)).nats
        assert forward == pytest.approx(backward, rel=1e-12)

    def test_total_power_divides_by_original_transmit_count(self):
        dims = ChannelDims(20, 4, 2)
        total = ergodic_capacity(dims, Snr(10.0, SnrScaling.TOTAL_POWER))
        per_mode = ergodic_capacity(dims, Snr(2.5))
        assert total.nats == pytest.approx(per_mode.nats, rel=1e-12)
        assert total.meta["scaling"] == "total_power"
        assert total.meta["rho_eff"] == 2.5


@pytest.mark.unit
class TestCdReference:
    def test_zero_snr(self):
        assert capacity_cd_reference(JacobiParams(1, 13, 4), Snr(0.0)).nats == 0.0

    @pytest.mark.parametrize("a,b", [(1, 2), (2, 1), (3.5, 1.5)])
    def test_single_eigenvalue(self, a, b, tight_rtol):
        est = capacity_cd_reference(JacobiParams(a, b, 1), Snr(4.0), tight_rtol)
        assert est.nats == pytest.approx(_beta_log_integral(a, b, 4.0), rel=1e-10)

    @pytest.mark.parametrize("dims", [(20, i, i) for i in range(1, 5)]
                             + [(25, 2, m_r) for m_r in range(2, 9)])
    @pytest.mark.parametrize("snr_db", [0, 5, 10, 15, 20])
    def test_agrees_with_theorem1(self, dims, snr_db):
        p = jacobi_params(ChannelDims(*dims))
        snr = Snr(10 ** (snr_db / 10))
        t1 = capacity_theorem1(p, snr)
        cd = capacity_cd_reference(p, snr)
        assert abs(t1.nats - cd.nats) <= 1e-8 * max(1.0, cd.nats)
        assert t1.meta["N_used"] <= 512

    def test_expected_trace(self):
        # d/drho at 0 of E ln det(I + rho J) is E tr J
        p = JacobiParams(1, 3, 2)
        h = 1e-6
        slope = capacity_cd_reference(p, Snr(h), 1e-13).nats / h
        assert slope == pytest.approx(trace_moments(p, 1)[0], rel=1e-5)


@pytest.mark.unit
class TestB1Fallback:
    def test_routes_to_cd_reference(self, caplog):
        dims = ChannelDims(4, 2, 2)
        with caplog.at_level(logging.WARNING):
            est = ergodic_capacity(dims, Snr(1.0))
        assert est.method is Method.CD_REFERENCE
        assert "falling back to cd_reference" in caplog.text
        assert est.nats == pytest.approx(capacity_cd_reference(jacobi_params(dims), Snr(1.0)).nats)


@pytest.mark.unit
class TestTraceMoments:
    def test_first_moment(self):
        p = JacobiParams(1, 3, 2)
        assert trace_moments(p, 1)[0] == pytest.approx(2 * 2 / 6, rel=1e-14)

    @pytest.mark.parametrize("a,b", [(1.0, 2.0), (2.5, 4.0)])
    def test_single_eigenvalue_beta_moments(self, a, b):
        moments = trace_moments(JacobiParams(a, b, 1), 10)
        for k, m_k in enumerate(moments, start=1):
            expected = math.exp(ln_gamma(a + k) - ln_gamma(a) - ln_gamma(a + b + k) + ln_gamma(a + b))
            assert m_k == pytest.approx(expected, rel=1e-12)

    def test_matches_joint_density(self):
        p = JacobiParams(2, 3, 2)
        moments = trace_moments(p, 3)
        for k in (1, 2, 3):
            expected, _ = integrate.dblquad(
                lambda l2, l1: (l1 ** k + l2 ** k) * joint_density(p, [l1, l2]),
                0, 1, lambda l1: l1, lambda l1: 1, epsabs=1e-12, epsrel=1e-10)
            assert moments[k - 1] == pytest.approx(expected, rel=1e-7)

    def test_bounded_by_matrix_size(self):
        moments = trace_moments(JacobiParams(1, 2, 4), 500)
        assert np.all(moments > 0)
        assert np.all(moments <= 4)
        assert np.all(np.diff(moments) < 0)


@pytest.mark.unit
class TestMomentSeries:
    def test_single_term(self):
        est = capacity_moment_series(JacobiParams(2, 3, 1), 0.5, terms=1)
        assert est.nats == pytest.approx(0.5 * 2 / 5, rel=1e-14)
        assert est.err == pytest.approx(0.25 / (2 * 0.5), rel=1e-14)

    def test_zero_snr(self):
        est = capacity_moment_series(JacobiParams(1, 3, 2), 0.0)
        assert (est.nats, est.err) == (0.0, 0.0)

    def test_reference_point(self, tight_rtol):
        p = JacobiParams(1, 3, 2)
        series = capacity_moment_series(p, 0.5, terms=200)
        direct = capacity_theorem1(p, Snr(0.5), tight_rtol).nats
        assert abs(series.nats - direct) <= 1e-10
        assert series.meta["K"] == 200
        assert series.meta["err_kind"] == "absolute"

    @pytest.mark.parametrize("p", SERIES_PARAMS, ids=lambda p: f"a{p.a:g}b{p.b:g}n{p.n}")
    @pytest.mark.parametrize("rho", [0.1, 0.3, 0.5, 0.9])
    def test_agrees_with_theorem1(self, p, rho, tight_rtol):
        series = capacity_moment_series(p, rho, terms=400)
        direct = capacity_theorem1(p, Snr(rho), tight_rtol).nats
        assert abs(series.nats - direct) <= max(1e-10, series.err)

    @pytest.mark.parametrize("rho", [1.0, 1.5, -0.1])
    def test_rejects_rho_outside_unit_interval(self, rho):
        with pytest.raises(DomainError):
            capacity_moment_series(JacobiParams(1, 3, 2), rho)

    def test_ergodic_capacity_dispatch(self):
        est = ergodic_capacity(ChannelDims(10, 2, 3), Snr(0.4), Method.MOMENT_SERIES, terms=300)
        assert est.method is Method.MOMENT_SERIES
        assert est.nats == pytest.approx(ergodic_capacity(ChannelDims(10, 2, 3), Snr(0.4)).nats, abs=1e-9)


@pytest.mark.unit
class TestRegroupedSeries:
    @pytest.mark.parametrize("p", SERIES_PARAMS, ids=lambda p: f"a{p.a:g}b{p.b:g}n{p.n}")
    @pytest.mark.parametrize("rho", [0.1, 0.3, 0.5, 0.9])
    def test_agrees_with_theorem1(self, p, rho, tight_rtol):
        series = capacity_regrouped_series(p, rho, terms=400)
        direct = capacity_theorem1(p, Snr(rho), tight_rtol).nats
        assert abs(series.nats - direct) <= max(1e-10, 10 * series.err)

    def test_agrees_with_moment_series(self):
        p = JacobiParams(2.0, 6.0, 2)
        assert capacity_regrouped_series(p, 0.7).nats == pytest.approx(
            capacity_moment_series(p, 0.7).nats, abs=1e-12)

    def test_zero_snr(self):
        est = capacity_regrouped_series(JacobiParams(1, 3, 2), 0.0)
        assert (est.nats, est.err) == (0.0, 0.0)
        assert est.meta["err_kind"] == "absolute_estimate"

    def test_rejects_rho_at_one(self):
        with pytest.raises(DomainError):
            capacity_regrouped_series(JacobiParams(1, 3, 2), 1.0)


@pytest.mark.unit
class TestRhoDerivativeIdentity:
    @pytest.mark.parametrize("a,b", [(1.0, 2.0), (2.0, 5.0)])
    def test_single_eigenvalue_form(self, a, b):
        p = JacobiParams(a, b, 1)
        rho = 0.4
        expected = const_A(p) * gauss_2f1(HypergeometricArgs(2, a + 1, a + b + 1, -rho))
        assert prop1_rhs(p, rho) == pytest.approx(expected, rel=1e-14)

    def test_small_rho_limit(self):
        p = JacobiParams(3.0, 4.0, 1)
        assert prop1_rhs(p, 1e-9) == pytest.approx(3 / 7, rel=1e-8)

    @pytest.mark.parametrize("a,b,n", [(1, 13, 4), (4, 17, 3), (2, 3, 2)])
    @pytest.mark.parametrize("rho", [0.2, 0.3, 0.5])
    def test_differential_identity(self, a, b, n, rho, tight_rtol):
        p = JacobiParams(a, b, n)
        lhs = rho_second_operator(lambda r: capacity_theorem1(p, Snr(r), tight_rtol).nats, rho)
        assert lhs == pytest.approx(prop1_rhs(p, rho), rel=1e-5)

    @pytest.mark.parametrize("rho", [0.0, 1.0, 2.0])
    def test_domain(self, rho):
        with pytest.raises(DomainError):
            prop1_rhs(JacobiParams(1, 3, 2), rho)


@pytest.mark.unit
class TestDecomposition:
    @pytest.mark.parametrize("rho", [0.5, 5.0, 100.0])
    def test_full_fiber(self, rho):
        est = capacity_decomposed(ChannelDims(2, 2, 2), Snr(rho))
        assert est.nats == pytest.approx(2 * math.log1p(rho), rel=1e-15)
        assert est.err == 0.0
        assert est.meta["complement"] is None
        assert est.meta["err_kind"] == "absolute_estimate"

    def test_one_unit_mode_plus_beta_eigenvalue(self, tight_rtol):
        rho = 5.0
        est = capacity_decomposed(ChannelDims(3, 2, 2), Snr(rho), tight_rtol)
        expected = math.log1p(rho) + _beta_log_integral(1, 2, rho)
        assert est.nats == pytest.approx(expected, rel=1e-10)
        assert est.method is Method.DECOMPOSITION
        assert est.meta["unit_modes"] == 1
        assert est.meta["complement"] == [3, 1, 1]

    def test_inner_method(self):
        dims = ChannelDims(8, 5, 6)
        t1 = capacity_decomposed(dims, Snr(10.0))
        cd = capacity_decomposed(dims, Snr(10.0), inner=Method.CD_REFERENCE)
        assert cd.meta["inner_method"] == "cd_reference"
        assert t1.nats == pytest.approx(cd.nats, rel=1e-8)

    def test_error_is_absolute(self):
        est = capacity_decomposed(ChannelDims(8, 5, 6), Snr(10.0))
        complement = capacity_theorem1(jacobi_params(ChannelDims(8, 2, 3)), Snr(10.0))
        assert est.meta["err_kind"] == "absolute_estimate"
        assert est.meta["inner_method"] == "theorem1"
        assert est.err == pytest.approx(complement.err * complement.nats, rel=1e-12)

    def test_total_power(self):
        est = capacity_decomposed(ChannelDims(2, 2, 2), Snr(4.0, SnrScaling.TOTAL_POWER))
        assert est.nats == pytest.approx(2 * math.log(3.0), rel=1e-15)

    def test_direct_dims_rejected(self):
        with pytest.raises(DimensionError):
            capacity_decomposed(ChannelDims(20, 2, 2), Snr(1.0))

    def test_routing_is_logged(self, caplog):
        with caplog.at_level(logging.WARNING):
            est = ergodic_capacity(ChannelDims(3, 2, 2), Snr(1.0))
        assert est.method is Method.DECOMPOSITION
        assert "decomposition" in caplog.text
