"""
Ergodic capacity of the Jacobi (optical fiber) MIMO channel.

A fiber with m modes, m_t excited and m_r received, has H equal to the
m_r x m_t corner of a Haar unitary. When m >= m_t + m_r the nonzero
eigenvalues of H^H H follow the Jacobi ensemble with

    a = m_r - m_t + 1,  b = m - m_t - m_r + 1,  n = m_t   (m_t <= m_r)

Evaluation routes:
    theorem1          double-integral form, Gauss-Jacobi over u in [0, 1]
    cd_reference      one-point density from the Christoffel-Darboux kernel
    moment_series     power series in rho from the trace moments, rho < 1
    regrouped_series  the same series summed per Jacobi-polynomial term
    decomposition     m < m_t + m_r: unit-modulus modes plus a complement

All values are in nats.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from channel import (CapacityEstimate, ChannelDims, Method, Snr, SnrScaling,
                     nonnegative_capacity)
from config import Config
from errors import DimensionError, DomainError
from metrics import track_capacity
from quadrature import gauss_jacobi01, integrate_converged
from specfun import HypergeometricArgs, dilog_inner, gauss_2f1, jacobi_p, ln_gamma

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class JacobiParams:
    """
    Jacobi ensemble parameters (a, b, n).

    m_t records the transmit count of the originating channel (before the
    m_t <= m_r swap) so total-power SNR scaling stays correct; it defaults
    to n for parameters built by hand.
    """
    a: float
    b: float
    n: int
    m_t: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Jacobi parameters need a > 0 and b > 0, got a={self.a}, b={self.b}")

    @property
    def transmit(self) -> int:
        return self.n if self.m_t is None else self.m_t

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "n": self.n}


def jacobi_params(dims: ChannelDims) -> JacobiParams:
    """Map channel dims to (a, b, n), swapping so that m_t <= m_r."""
    if dims.needs_decomposition:
        raise DimensionError(
            f"m={dims.m} < m_t + m_r = {dims.m_t + dims.m_r}; use capacity_decomposed"
        )
    m_t, m_r = min(dims.m_t, dims.m_r), max(dims.m_t, dims.m_r)
    return JacobiParams(a=m_r - m_t + 1, b=dims.m - m_t - m_r + 1, n=m_t, m_t=dims.m_t)


def _log_pochhammer(x: float, k: int) -> float:
    return ln_gamma(x + k) - ln_gamma(x)


def const_A(p: JacobiParams) -> float:
    """(a+n-1) n! / (a+b+n-1)_n"""
    a, b, n = p.a, p.b, p.n
    return math.exp(math.log(a + n - 1) + ln_gamma(n + 1) - _log_pochhammer(a + b + n - 1, n))


def const_B(p: JacobiParams) -> float:
    """n! Gamma(a+b+n-1) / (Gamma(a+n-1) Gamma(n+b-1))"""
    a, b, n = p.a, p.b, p.n
    if a + n - 1 <= 0 or n + b - 1 <= 0:
        raise DomainError(f"const_B needs a+n-1 > 0 and n+b-1 > 0, got a={a}, b={b}, n={n}")
    return math.exp(ln_gamma(n + 1) + ln_gamma(a + b + n - 1)
                    - ln_gamma(a + n - 1) - ln_gamma(n + b - 1))


def selberg_log_norm(p: JacobiParams) -> float:
    """
    ln Z: the Selberg integral of prod l^(a-1)(1-l)^(b-1) |V(l)|^2 over
    the unit cube (unordered eigenvalues).
    """
    a, b, n = p.a, p.b, p.n
    terms = []
    for j in range(1, n + 1):
        terms.append(ln_gamma(a + j - 1) + ln_gamma(b + j - 1) + ln_gamma(1 + j)
                     - ln_gamma(a + b + n + j - 2))
    return math.fsum(terms)


def joint_density(p: JacobiParams, lambdas: Sequence[float]) -> float:
    """
    Eigenvalue density on the ordered chamber 0 < l_1 < ... < l_n < 1.

    Normalized by n!/Z so it integrates to one over the chamber.
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (p.n,):
        raise DimensionError(f"expected {p.n} eigenvalues, got shape {lam.shape}")
    if not (lam[0] > 0 and lam[-1] < 1 and np.all(np.diff(lam) > 0)):
        raise DomainError(f"eigenvalues must satisfy 0 < l_1 < ... < l_n < 1, got {lam.tolist()}")

    log_weight = np.sum((p.a - 1) * np.log(lam) + (p.b - 1) * np.log1p(-lam))
    diffs = lam[np.newaxis, :] - lam[:, np.newaxis]
    log_vandermonde = np.sum(np.log(diffs[np.triu_indices(p.n, k=1)]))
    log_density = ln_gamma(p.n + 1) - selberg_log_norm(p) + log_weight + 2.0 * log_vandermonde
    return math.exp(log_density)


def _estimate(nats: float, method: Method, err: float, p: JacobiParams, snr: Snr,
              rho_eff: float, **meta) -> CapacityEstimate:
    info = {"rho_eff": rho_eff, "scaling": snr.scaling.value, **p.to_dict()}
    info.update(meta)
    return CapacityEstimate(nats=nats, method=method, err=err, meta=info)


@track_capacity("theorem1")
def capacity_theorem1(p: JacobiParams, snr: Snr, rtol: Optional[float] = None) -> CapacityEstimate:
    """
    Capacity as one integral against the Jacobi weight:

        C = -B * int_0^1 u^(a-1) (1-u)^(b-2) P_{n-1}^(a-1,b)(1-2u)
                 P_n^(a-1,b-2)(1-2u) Li(rho u) du

    with Li(t) = int_0^t ln(1+s)/s ds. Valid for a > 0, b > 1.

    err is the achieved relative change of the doubling driver.
    """
    if not p.b > 1:
        raise DomainError(f"theorem1 needs b > 1, got b={p.b}; use cd_reference")
    rho = snr.effective(p.transmit)
    if rho == 0:
        return _estimate(0.0, Method.THEOREM1, 0.0, p, snr, rho, N_used=0, err_kind="relative")

    a, b, n = p.a, p.b, p.n

    def integrand(u):
        x = 1.0 - 2.0 * u
        return jacobi_p(n - 1, a - 1, b, x) * jacobi_p(n, a - 1, b - 2, x) * dilog_inner(rho * u)

    result = integrate_converged(lambda size: gauss_jacobi01(size, a - 1, b - 2), integrand, rtol)
    value = -const_B(p) * result.value
    nats = nonnegative_capacity(value, abs(value) * result.achieved_rtol, "theorem1")
    return _estimate(nats, Method.THEOREM1, result.achieved_rtol, p, snr, rho,
                     N_used=result.n_used, err_kind="relative")


def _orthonormal_log_norms(a: float, b: float, n: int) -> np.ndarray:
    """ln h_k for the weight l^(a-1)(1-l)^(b-1) on [0, 1], k < n."""
    logs = [ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)]
    for k in range(1, n):
        logs.append(ln_gamma(k + a) + ln_gamma(k + b) - math.log(2 * k + a + b - 1)
                    - ln_gamma(k + a + b - 1) - ln_gamma(k + 1))
    return np.array(logs)


@track_capacity("cd_reference")
def capacity_cd_reference(p: JacobiParams, snr: Snr, rtol: Optional[float] = None) -> CapacityEstimate:
    """
    One-point density route: int_0^1 ln(1 + rho l) K_n(l, l) w(l) dl with
    K_n the Christoffel-Darboux kernel of the shifted Jacobi weight
    w(l) = l^(a-1)(1-l)^(b-1). Works for any a, b > 0, including b = 1.
    """
    rho = snr.effective(p.transmit)
    if rho == 0:
        return _estimate(0.0, Method.CD_REFERENCE, 0.0, p, snr, rho, N_used=0, err_kind="relative")

    a, b, n = p.a, p.b, p.n
    inv_norms = np.exp(-_orthonormal_log_norms(a, b, n))

    def integrand(lam):
        x = 1.0 - 2.0 * lam
        kernel = np.zeros_like(lam)
        for k in range(n):
            kernel += inv_norms[k] * jacobi_p(k, a - 1, b - 1, x) ** 2
        return np.log1p(rho * lam) * kernel

    result = integrate_converged(lambda size: gauss_jacobi01(size, a - 1, b - 1), integrand, rtol)
    return _estimate(result.value, Method.CD_REFERENCE, result.achieved_rtol, p, snr, rho,
                     N_used=result.n_used, err_kind="relative")


def _check_series_rho(rho: float) -> None:
    if not 0 <= rho < 1:
        raise DomainError(f"series routes need 0 <= rho < 1, got {rho}")


def prop1_rhs(p: JacobiParams, rho: float) -> float:
    """
    Right-hand side of the differential identity d/drho (rho dC/drho):

        A rho^(n-1) P_{n-1}^(a-1,b)((rho+2)/rho) 2F1(n+1, a+n; a+b+2n-1; -rho)
    """
    if not 0 < rho < 1:
        raise DomainError(f"prop1_rhs needs 0 < rho < 1, got {rho}")
    a, b, n = p.a, p.b, p.n
    poly = rho ** (n - 1) * jacobi_p(n - 1, a - 1, b, (rho + 2.0) / rho)
    hyp = gauss_2f1(HypergeometricArgs(n + 1, a + n, a + b + 2 * n - 1, -rho))
    return const_A(p) * poly * hyp


def trace_moments(p: JacobiParams, k_max: int) -> np.ndarray:
    """
    E[tr J^k] for k = 1..k_max.

    Each term of the alternating inner sum is a ratio of gamma functions
    evaluated in log space; only i <= min(k-1, n-1) contributes.
    """
    a, b, n = p.a, p.b, p.n
    k = np.arange(1, k_max + 1, dtype=float)[:, np.newaxis]
    i = np.arange(n, dtype=float)[np.newaxis, :]
    k, i = np.broadcast_arrays(k, i)
    valid = i <= k - 1
    kv, iv = k[valid], i[valid]

    log_terms = (ln_gamma(kv) - ln_gamma(iv + 1) - ln_gamma(kv - iv)
                 - ln_gamma(kv + 1)
                 + ln_gamma(n + kv - iv) - ln_gamma(n - iv)
                 + ln_gamma(a + n + kv - iv - 1) - ln_gamma(a + n - iv - 1)
                 - ln_gamma(a + b + 2 * n + kv - iv - 2) + ln_gamma(a + b + 2 * n - iv - 2))
    terms = np.zeros(k.shape)
    terms[valid] = np.where(iv % 2 == 0, 1.0, -1.0) * np.exp(log_terms)
    return np.array([math.fsum(row) for row in terms])


@track_capacity("moment_series")
def capacity_moment_series(p: JacobiParams, rho: float, terms: Optional[int] = None,
                           snr: Optional[Snr] = None) -> CapacityEstimate:
    """
    sum_{k=1}^K (-1)^(k-1) rho^k M_k / k with M_k the trace moments.

    err = n rho^(K+1) / ((K+1)(1-rho)) bounds the tail since |M_k| <= n.
    """
    _check_series_rho(rho)
    K = Config.MOMENT_TERMS if terms is None else int(terms)
    if K < 1:
        raise DomainError(f"moment series needs at least one term, got {K}")
    snr = snr or Snr(rho, SnrScaling.PER_MODE)
    if rho == 0:
        return _estimate(0.0, Method.MOMENT_SERIES, 0.0, p, snr, rho, K=K, err_kind="absolute")

    moments = trace_moments(p, K)
    k = np.arange(1, K + 1)
    signs = np.where(k % 2 == 1, 1.0, -1.0)
    value = math.fsum(signs * rho ** k * moments / k)
    err = p.n * rho ** (K + 1) / ((K + 1) * (1.0 - rho))
    nats = nonnegative_capacity(value, err, "moment_series")
    return _estimate(nats, Method.MOMENT_SERIES, err, p, snr, rho, K=K, err_kind="absolute")


@track_capacity("regrouped_series")
def capacity_regrouped_series(p: JacobiParams, rho: float, terms: Optional[int] = None,
                              snr: Optional[Snr] = None) -> CapacityEstimate:
    """
    The moment series with summation order exchanged:

        C = n (a)_n/(a+b+n-1)_n sum_{i<n} C(n-1,i) (a+b+n-1)_{n-1-i}/(a)_{n-1-i}
            sum_{k>=0} (-1)^k rho^(k+i+1)/(k+i+1)^2 c_k,
        c_k = (n+1)_k (a+n)_k / ((a+b+2n-1)_k k!)

    err estimates the tail from the first omitted inner term.
    """
    _check_series_rho(rho)
    K = Config.MOMENT_TERMS if terms is None else int(terms)
    if K < 1:
        raise DomainError(f"regrouped series needs at least one term, got {K}")
    snr = snr or Snr(rho, SnrScaling.PER_MODE)
    if rho == 0:
        return _estimate(0.0, Method.REGROUPED_SERIES, 0.0, p, snr, rho, K=K,
                         err_kind="absolute_estimate")

    a, b, n = p.a, p.b, p.n
    k = np.arange(K + 1, dtype=float)
    ratios = (n + 1 + k[:-1]) * (a + n + k[:-1]) / ((a + b + 2 * n - 1 + k[:-1]) * (k[:-1] + 1))
    c = np.concatenate([[1.0], np.cumprod(ratios)])
    signs = np.where(k % 2 == 0, 1.0, -1.0)

    lead = math.log(n) + _log_pochhammer(a, n) - _log_pochhammer(a + b + n - 1, n)
    outer, tails = [], []
    for i in range(n):
        log_w = (lead + ln_gamma(n) - ln_gamma(i + 1) - ln_gamma(n - i)
                 + _log_pochhammer(a + b + n - 1, n - 1 - i) - _log_pochhammer(a, n - 1 - i))
        weight = math.exp(log_w)
        powers = rho ** (k + i + 1) / (k + i + 1) ** 2
        inner = math.fsum(signs[:-1] * powers[:-1] * c[:-1])
        outer.append(weight * inner)
        tails.append(weight * powers[-1] * c[-1] / (1.0 - rho))

    value = math.fsum(outer)
    err = math.fsum(tails)
    nats = nonnegative_capacity(value, err, "regrouped_series")
    return _estimate(nats, Method.REGROUPED_SERIES, err, p, snr, rho, K=K,
                     err_kind="absolute_estimate")


def _evaluate(dims: ChannelDims, snr: Snr, method: Method, rtol: Optional[float],
              terms: Optional[int]) -> CapacityEstimate:
    p = jacobi_params(dims)
    if method is Method.THEOREM1:
        if p.b <= 1:
            logger.warning(
                f"b={p.b} outside theorem1 range for m={dims.m}, m_t={dims.m_t}, "
                f"m_r={dims.m_r}; falling back to cd_reference"
            )
            return capacity_cd_reference(p, snr, rtol)
        return capacity_theorem1(p, snr, rtol)
    if method is Method.CD_REFERENCE:
        return capacity_cd_reference(p, snr, rtol)
    if method is Method.MOMENT_SERIES:
        return capacity_moment_series(p, snr.effective(dims.m_t), terms, snr)
    if method is Method.REGROUPED_SERIES:
        return capacity_regrouped_series(p, snr.effective(dims.m_t), terms, snr)
    raise DomainError(f"method {method.value} is not an analytic Jacobi route")


@track_capacity("decomposition")
def capacity_decomposed(dims: ChannelDims, snr: Snr, rtol: Optional[float] = None,
                        inner: Method = Method.THEOREM1, terms: Optional[int] = None) -> CapacityEstimate:
    """
    m < m_t + m_r: (m_t + m_r - m) modes pass with unit modulus, the rest
    behave as the complementary channel (m, m - m_r, m - m_t).

    The complement is evaluated with `inner` at the per-mode rho_eff of the
    original channel. err is the complement's error estimate in nats.
    """
    if not dims.needs_decomposition:
        raise DimensionError(
            f"decomposition needs m < m_t + m_r, got m={dims.m}, m_t={dims.m_t}, m_r={dims.m_r}"
        )
    rho = snr.effective(dims.m_t)
    unit_modes = dims.m_t + dims.m_r - dims.m
    direct = unit_modes * math.log1p(rho)

    meta = {"rho_eff": rho, "scaling": snr.scaling.value, "unit_modes": unit_modes}
    comp_t, comp_r = dims.m - dims.m_r, dims.m - dims.m_t
    if comp_t == 0 or comp_r == 0:
        return CapacityEstimate(nats=direct, method=Method.DECOMPOSITION, err=0.0,
                                meta={**meta, "complement": None, "err_kind": "absolute_estimate"})

    complement = _evaluate(ChannelDims(dims.m, comp_t, comp_r), Snr(rho, SnrScaling.PER_MODE),
                           inner, rtol, terms)
    # the unit modes are exact; the complement's error carries over in nats
    abs_err = complement.err
    if complement.meta.get("err_kind") == "relative":
        abs_err = complement.err * complement.nats
    meta.update({
        "complement": [dims.m, comp_t, comp_r],
        "inner_method": complement.method.value,
        **{k: v for k, v in complement.meta.items() if k in ("N_used", "K", "a", "b", "n")},
        "err_kind": "absolute_estimate",
    })
    return CapacityEstimate(nats=direct + complement.nats, method=Method.DECOMPOSITION,
                            err=abs_err, meta=meta)


def ergodic_capacity(dims: ChannelDims, snr: Snr, method: Method = Method.THEOREM1,
                     rtol: Optional[float] = None, terms: Optional[int] = None) -> CapacityEstimate:
    """
    Analytic Jacobi capacity for any valid dims.

    m < m_t + m_r goes through the decomposition; b = 1 under theorem1
    falls back to cd_reference. Both reroutes are logged at WARNING.
    """
    if dims.needs_decomposition:
        logger.warning(
            f"m={dims.m} < m_t + m_r = {dims.m_t + dims.m_r}; "
            f"evaluating through the decomposition with {method.value} on the complement"
        )
        return capacity_decomposed(dims, snr, rtol, inner=method, terms=terms)
    return _evaluate(dims, snr, method, rtol, terms)
