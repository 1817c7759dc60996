"""
Special functions used by the capacity formulas.

Pochhammer symbols, log-gamma, the Gauss hypergeometric series, Jacobi and
Laguerre polynomials and the integral of ln(1+s)/s (minus the dilogarithm at
-t). Everything is real-valued and pure.

Polynomial and dilogarithm evaluators accept numpy arrays so the quadrature
driver can evaluate integrands node-wise in one call.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from scipy import special

from config import Config
from errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Li2(y) = y * sum_{k>=1} y^(k-1)/k^2; 64 terms reach double precision for |y| <= 1/2
_LI2_TERMS = 64
_LI2_COEFFS = 1.0 / np.arange(_LI2_TERMS, 0, -1, dtype=float) ** 2
_PI2_6 = math.pi ** 2 / 6.0


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def _as_output(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values) if scalar else values


def _check_degree(q: int) -> None:
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or q < 0:
        raise DomainError(f"polynomial degree must be a non-negative integer, got {q!r}")


def ln_gamma(x: ArrayLike) -> ArrayLike:
    """ln Gamma(x) for x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    return _as_output(special.gammaln(arr), arr.ndim == 0)


def pochhammer(x: float, k: int) -> float:
    """
    Rising factorial (x)_k = x (x+1) ... (x+k-1).

    For x = -q with q a non-negative integer the product hits zero once
    k > q; otherwise it equals (-1)^k q!/(q-k)!.
    """
    _check_degree(k)
    if k == 0:
        return 1.0
    if _is_nonpositive_int(x):
        q = int(-x)
        if k > q:
            return 0.0
        return float((-1) ** k * (math.factorial(q) // math.factorial(q - k)))
    return float(special.poch(x, k))


@dataclass(frozen=True)
class HypergeometricArgs:
    """Parameters (theta, sigma; gamma) and argument z of 2F1."""
    theta: float
    sigma: float
    gamma: float
    z: float

    def __post_init__(self):
        if _is_nonpositive_int(self.gamma):
            raise DomainError(f"2F1 gamma must not be zero or a negative integer, got {self.gamma}")
        if not math.isfinite(self.z):
            raise DomainError(f"2F1 argument must be finite, got {self.z}")

    @property
    def terminating_degree(self) -> Optional[int]:
        degrees = [int(-p) for p in (self.theta, self.sigma) if _is_nonpositive_int(p)]
        return min(degrees) if degrees else None


def gauss_2f1(args: HypergeometricArgs, rtol: Optional[float] = None,
              term_cap: Optional[int] = None) -> float:
    """
    Real Gauss hypergeometric function 2F1(theta, sigma; gamma; z).

    A non-positive integer upper parameter gives a polynomial, summed exactly
    for any z. Otherwise z must be < 1; arguments below -1/2 are first mapped
    into (1/3, 1) by the Pfaff transformation.

    Raises:
        DomainError: z >= 1 for a non-terminating series
        ConvergenceError: tolerance not met within the term cap
    """
    rtol = Config.SERIES_RTOL if rtol is None else rtol
    term_cap = Config.SERIES_TERM_CAP if term_cap is None else term_cap

    degree = args.terminating_degree
    if degree is not None:
        return _terminating_sum(args, degree)
    if args.z >= 1:
        raise DomainError(f"2F1 series diverges for z = {args.z} >= 1")
    if args.z == 0:
        return 1.0
    if args.z < -0.5:
        w = args.z / (args.z - 1.0)
        mapped = HypergeometricArgs(args.theta, args.gamma - args.sigma, args.gamma, w)
        return (1.0 - args.z) ** (-args.theta) * gauss_2f1(mapped, rtol, term_cap)
    return _series_sum(args, rtol, term_cap)


def _terminating_sum(args: HypergeometricArgs, degree: int) -> float:
    # rational arithmetic on the exact binary values; one rounding at the end
    theta, sigma = Fraction(args.theta), Fraction(args.sigma)
    gamma, z = Fraction(args.gamma), Fraction(args.z)
    total = term = Fraction(1)
    for k in range(degree):
        term *= (theta + k) * (sigma + k) / ((gamma + k) * (k + 1)) * z
        total += term
    return float(total)


def _series_sum(args: HypergeometricArgs, rtol: float, term_cap: int) -> float:
    theta, sigma, gamma, z = args.theta, args.sigma, args.gamma, args.z
    total = 1.0
    term = 1.0
    for k in range(term_cap):
        ratio = (theta + k) * (sigma + k) / ((gamma + k) * (k + 1)) * z
        term *= ratio
        total += term
        if term == 0.0:
            return total
        # terms shrink geometrically once |ratio| < 1; bound the tail by that ratio
        r = abs(ratio)
        if r < 1.0 and abs(term) * r / (1.0 - r) <= rtol * abs(total):
            return total
    logger.debug(f"2F1 series stalled: theta={theta}, sigma={sigma}, gamma={gamma}, z={z}")
    raise ConvergenceError(
        f"2F1 series did not reach rtol={rtol} within {term_cap} terms",
        method="gauss_2f1",
        diagnostics={"theta": theta, "sigma": sigma, "gamma": gamma, "z": z,
                     "terms": term_cap, "last_term": term, "partial_sum": total},
    )


def jacobi_p(q: int, alpha: float, beta: float, x: ArrayLike) -> ArrayLike:
    """
    Jacobi polynomial P_q^(alpha, beta)(x) for any real x.

    Uses the three-term recurrence written in powers of (x - 1); falls back
    to the explicit binomial sum for parameters where a recurrence
    denominator vanishes.
    """
    _check_degree(q)
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    if q == 0:
        return _as_output(np.ones_like(xs), scalar)

    s = alpha + beta
    if any((n + s) * (2 * n + s - 2) == 0 for n in range(2, q + 1)):
        return _as_output(_jacobi_p_sum(q, alpha, beta, xs), scalar)

    dx = xs - 1.0
    p_prev = np.ones_like(xs)
    p_curr = (alpha + 1.0) + 0.5 * (s + 2.0) * dx
    for n in range(2, q + 1):
        c1 = (2 * n + s) * (2 * n + s - 2)
        u = 2 * n + alpha - 1
        c0 = u * u + 2 * u * beta + alpha * alpha - 1.0
        lead = (2 * n + s - 1) * (c1 * dx + c0)
        back = 2 * (n + alpha - 1) * (n + beta - 1) * (2 * n + s)
        denom = 2 * n * (n + s) * (2 * n + s - 2)
        p_prev, p_curr = p_curr, (lead * p_curr - back * p_prev) / denom
    return _as_output(p_curr, scalar)


def _jacobi_p_sum(q: int, alpha: float, beta: float, xs: np.ndarray) -> np.ndarray:
    half_minus = 0.5 * (xs - 1.0)
    half_plus = 0.5 * (xs + 1.0)
    total = np.zeros_like(xs)
    for j in range(q + 1):
        coeff = special.binom(q + alpha, q - j) * special.binom(q + beta, j)
        total += coeff * half_minus ** j * half_plus ** (q - j)
    return total


def laguerre_l(q: int, alpha: float, x: ArrayLike) -> ArrayLike:
    """Generalized Laguerre polynomial L_q^alpha(x), x >= 0."""
    _check_degree(q)
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0):
        raise DomainError("laguerre_l requires x >= 0")
    scalar = xs.ndim == 0
    p_prev = np.ones_like(xs)
    if q == 0:
        return _as_output(p_prev, scalar)
    p_curr = 1.0 + alpha - xs
    for n in range(2, q + 1):
        p_prev, p_curr = p_curr, ((2 * n - 1 + alpha - xs) * p_curr - (n - 1 + alpha) * p_prev) / n
    return _as_output(p_curr, scalar)


def _li2_small(y: np.ndarray) -> np.ndarray:
    """Li2(y) by its power series, |y| <= 1/2."""
    return y * np.polyval(_LI2_COEFFS, y)


def dilog_inner(t: ArrayLike) -> ArrayLike:
    """
    Integral of ln(1+s)/s over [0, t], i.e. -Li2(-t), for t >= 0.

    Series up to t = 1/2; Landen's identity plus reflection on (1/2, 2];
    inversion beyond. On (1/2, 2] the Landen argument y = t/(1+t) is summed
    directly when y <= 1/2 and reflected onto 1 - y otherwise, so every
    series call sees an argument of modulus <= 1/2.
    """
    ts = np.asarray(t, dtype=float)
    if np.any(~(ts >= 0)):
        raise DomainError(f"dilog_inner requires t >= 0, got {t!r}")
    scalar = ts.ndim == 0
    ts = np.atleast_1d(ts)
    out = np.empty_like(ts)

    small = ts <= 0.5
    mid = (ts > 0.5) & (ts <= 2.0)
    large = ts > 2.0

    out[small] = -_li2_small(-ts[small])

    if np.any(mid):
        tm = ts[mid]
        log1p = np.log1p(tm)
        y = tm / (1.0 + tm)
        # y in (1/3, 2/3]; reflect onto 1 - y = 1/(1+t) only above 1/2
        direct = y <= 0.5
        li2_y = np.empty_like(y)
        li2_y[direct] = _li2_small(y[direct])
        yr = y[~direct]
        li2_y[~direct] = _PI2_6 - np.log(yr) * np.log1p(-yr) - _li2_small(1.0 / (1.0 + tm[~direct]))
        out[mid] = li2_y + 0.5 * log1p ** 2

    if np.any(large):
        tl = ts[large]
        out[large] = _PI2_6 + 0.5 * np.log(tl) ** 2 + _li2_small(-1.0 / tl)

    return _as_output(out[0], True) if scalar else out
