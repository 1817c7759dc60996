"""
Ergodic capacity of the Gaussian (Rayleigh) MIMO channel.

With n = min(m_t, m_r) and alpha = |m_r - m_t|, the nonzero eigenvalues of
H^H H follow the Laguerre ensemble with weight u^alpha e^-u. Both routes
integrate against that weight: pure Gauss-Laguerre when rho_eff <= 1, the
split Jacobi + shifted Laguerre rule above that.
"""

import logging
import math
from typing import Callable, Optional

import numpy as np

from channel import (CapacityEstimate, ChannelDims, GaussianDims, Method, Snr, SnrScaling,
                     nonnegative_capacity)
from errors import DomainError
from jacobi_capacity import ergodic_capacity
from metrics import track_capacity
from quadrature import QuadratureRule, gauss_laguerre, gauss_laguerre_split, integrate_converged
from specfun import dilog_inner, laguerre_l, ln_gamma

logger = logging.getLogger(__name__)


def _rule_factory(alpha: float, rho: float) -> Callable[[int], QuadratureRule]:
    if rho <= 1.0:
        return lambda size: gauss_laguerre(size, alpha)
    return lambda size: gauss_laguerre_split(size, alpha)


def _meta(dims: GaussianDims, snr: Snr, rho: float, n_used: int) -> dict:
    n, alpha = dims.canonical()
    return {"rho_eff": rho, "scaling": snr.scaling.value, "n": n, "alpha": alpha,
            "N_used": n_used, "err_kind": "relative"}


@track_capacity("theorem2")
def capacity_theorem2(dims: GaussianDims, snr: Snr, rtol: Optional[float] = None) -> CapacityEstimate:
    """
    Capacity as one integral against the Laguerre weight:

        C = -(n!/(n+alpha-1)!) int_0^inf u^alpha e^-u L_{n-1}^alpha(u)
                 L_n^alpha(u) Li(rho u) du

    rho_eff = rho (per_mode) or rho/m_t (total_power), i.e. the formula
    computes E ln det(I + rho_eff H^H H).
    """
    n, alpha = dims.canonical()
    rho = snr.effective(dims.m_t)
    if rho == 0:
        return CapacityEstimate(0.0, Method.THEOREM2, 0.0, _meta(dims, snr, rho, 0))

    def integrand(u):
        return laguerre_l(n - 1, alpha, u) * laguerre_l(n, alpha, u) * dilog_inner(rho * u)

    result = integrate_converged(_rule_factory(alpha, rho), integrand, rtol)
    value = -math.exp(ln_gamma(n + 1) - ln_gamma(n + alpha)) * result.value
    nats = nonnegative_capacity(value, abs(value) * result.achieved_rtol, "theorem2")
    return CapacityEstimate(nats, Method.THEOREM2, result.achieved_rtol,
                            _meta(dims, snr, rho, result.n_used))


@track_capacity("laguerre_reference")
def capacity_laguerre_reference(dims: GaussianDims, snr: Snr,
                                rtol: Optional[float] = None) -> CapacityEstimate:
    """
    One-point Laguerre density route:

        int_0^inf ln(1 + rho l) sum_{k<n} k!/(k+alpha)! L_k^alpha(l)^2 l^alpha e^-l dl
    """
    n, alpha = dims.canonical()
    rho = snr.effective(dims.m_t)
    if rho == 0:
        return CapacityEstimate(0.0, Method.LAGUERRE_REFERENCE, 0.0, _meta(dims, snr, rho, 0))

    coeffs = [math.exp(ln_gamma(k + 1) - ln_gamma(k + alpha + 1)) for k in range(n)]

    def integrand(lam):
        kernel = np.zeros_like(lam)
        for k, coeff in enumerate(coeffs):
            kernel += coeff * laguerre_l(k, alpha, lam) ** 2
        return np.log1p(rho * lam) * kernel

    result = integrate_converged(_rule_factory(alpha, rho), integrand, rtol)
    return CapacityEstimate(result.value, Method.LAGUERRE_REFERENCE, result.achieved_rtol,
                            _meta(dims, snr, rho, result.n_used))


def jacobi_large_b_gap(m_t: int, m_r: int, rho: float, b: int,
                       rtol: Optional[float] = None) -> float:
    """
    |C_J(m_t, m_r, m_t + m_r - 1 + b, b rho) - C_G(m_t, m_r, rho)| under
    per-mode scaling. Shrinks as b grows since b J tends to the Laguerre
    ensemble.
    """
    if isinstance(b, bool) or not isinstance(b, int) or b < 2:
        raise DomainError(f"b must be an integer >= 2, got {b!r}")
    jacobi = ergodic_capacity(ChannelDims(m_t + m_r - 1 + b, m_t, m_r),
                              Snr(b * rho, SnrScaling.PER_MODE), Method.THEOREM1, rtol)
    gaussian = capacity_theorem2(GaussianDims(m_t, m_r), Snr(rho, SnrScaling.PER_MODE), rtol)
    gap = abs(jacobi.nats - gaussian.nats)
    logger.debug(f"large-b gap m_t={m_t} m_r={m_r} rho={rho} b={b}: {gap:.3e}")
    return gap
