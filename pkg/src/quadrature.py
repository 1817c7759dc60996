"""
Gaussian quadrature rules and the doubling integration driver.

Rules come from Golub-Welsch: the Jacobi matrix of the monic three-term
recurrence is diagonalized, nodes are its eigenvalues and weights are
mu0 * v0^2 with v0 the first eigenvector components.

Families:
    jacobi01(p, q)      weight u^p (1-u)^q on [0, 1]
    laguerre(alpha)     weight u^alpha e^-u on [0, inf)
    laguerre_split      same weight, Gauss-Jacobi on [0, c] plus a shifted
                        Gauss-Laguerre tail on [c, inf); used at large SNR
                        where the pure Laguerre rule converges slowly
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from config import Config
from errors import ConvergenceError, DomainError
from linalg import SymTridiagonal, tridiag_eigen
from metrics import track_quadrature
from specfun import ln_gamma

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a weighted Gaussian rule."""
    kind: str
    params: Tuple[float, ...]
    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: Optional[int]

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise DomainError("nodes and weights must be 1-D arrays of equal length")

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        values = np.asarray(f(self.nodes), dtype=float)
        return math.fsum(self.weights * values)


class Integration(NamedTuple):
    value: float
    achieved_rtol: float
    n_used: int


def _check_size(n: int) -> None:
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise DomainError(f"rule size must be a positive integer, got {n!r}")


def _golub_welsch(diag: np.ndarray, offdiag: np.ndarray, log_mu0: float) -> Tuple[np.ndarray, np.ndarray]:
    nodes, first = tridiag_eigen(SymTridiagonal(diag, offdiag))
    with np.errstate(divide="ignore"):
        weights = np.exp(log_mu0 + 2.0 * np.log(first))
    return nodes, weights


def _freeze(nodes: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    nodes = np.ascontiguousarray(nodes)
    weights = np.ascontiguousarray(weights)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _drop_underflow(kind: str, n: int, nodes: np.ndarray,
                    weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # weights far out in a decaying weight function underflow to zero for large N
    keep = weights > 0
    if keep.all() or not keep.any():
        return nodes, weights
    logger.debug(f"{kind} N={n}: dropping {int((~keep).sum())} nodes with underflowed weights")
    return nodes[keep], weights[keep]


def _check_rule(kind: str, nodes: np.ndarray, weights: np.ndarray, lower: float, upper: float) -> None:
    if np.any(np.diff(nodes) <= 0):
        raise ConvergenceError(f"{kind} nodes not strictly increasing", method=kind,
                               diagnostics={"N": len(nodes)})
    if not (nodes[0] > lower and nodes[-1] < upper):
        raise ConvergenceError(f"{kind} nodes escaped ({lower}, {upper})", method=kind,
                               diagnostics={"N": len(nodes), "min": nodes[0], "max": nodes[-1]})
    if np.any(~(weights > 0)):
        raise ConvergenceError(f"{kind} produced non-positive weights", method=kind,
                               diagnostics={"N": len(nodes)})


@lru_cache(maxsize=128)
def _jacobi01_cached(n: int, p: float, q: float) -> Tuple[np.ndarray, np.ndarray]:
    k = np.arange(n, dtype=float)
    s = p + q
    diag = np.empty(n)
    diag[0] = (p + 1.0) / (s + 2.0)
    kk = k[1:]
    # (1 - a_k)/2 of the [-1, 1] recurrence, written without cancellation
    diag[1:] = (2 * kk * (kk + 1) + s * (2 * kk + 1 + p)) / ((2 * kk + s) * (2 * kk + s + 2))

    b = np.empty(n - 1)
    if n > 1:
        b[0] = 4 * (1 + p) * (1 + q) / ((2 + s) ** 2 * (3 + s))
        kk = k[2:]
        b[1:] = (4 * kk * (kk + p) * (kk + q) * (kk + s)
                 / ((2 * kk + s) ** 2 * (2 * kk + s + 1) * (2 * kk + s - 1)))
    offdiag = 0.5 * np.sqrt(b)

    log_mu0 = ln_gamma(p + 1.0) + ln_gamma(q + 1.0) - ln_gamma(s + 2.0)
    nodes, weights = _golub_welsch(diag, offdiag, log_mu0)
    nodes, weights = _drop_underflow("jacobi01", n, nodes, weights)
    _check_rule("jacobi01", nodes, weights, 0.0, 1.0)
    return _freeze(nodes, weights)


def gauss_jacobi01(n: int, p: float, q: float) -> QuadratureRule:
    """Gauss rule for the weight u^p (1-u)^q on [0, 1], exact to degree 2N-1."""
    _check_size(n)
    if not (p > -1 and q > -1):
        raise DomainError(f"jacobi01 weight needs p > -1 and q > -1, got p={p}, q={q}")
    nodes, weights = _jacobi01_cached(n, float(p), float(q))
    return QuadratureRule("jacobi01", (float(p), float(q)), nodes, weights, 2 * n - 1)


@lru_cache(maxsize=128)
def _laguerre_cached(n: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    k = np.arange(n, dtype=float)
    diag = 2 * k + alpha + 1
    kk = k[1:]
    offdiag = np.sqrt(kk * (kk + alpha))
    nodes, weights = _golub_welsch(diag, offdiag, ln_gamma(alpha + 1.0))
    nodes, weights = _drop_underflow("laguerre", n, nodes, weights)
    _check_rule("laguerre", nodes, weights, 0.0, math.inf)
    return _freeze(nodes, weights)


def gauss_laguerre(n: int, alpha: float) -> QuadratureRule:
    """Gauss rule for the weight u^alpha e^-u on [0, inf), exact to degree 2N-1."""
    _check_size(n)
    if not alpha > -1:
        raise DomainError(f"laguerre weight needs alpha > -1, got {alpha}")
    nodes, weights = _laguerre_cached(n, float(alpha))
    return QuadratureRule("laguerre", (float(alpha),), nodes, weights, 2 * n - 1)


@lru_cache(maxsize=128)
def _laguerre_split_cached(n: int, alpha: float, c: float) -> Tuple[np.ndarray, np.ndarray]:
    head = gauss_jacobi01(n, alpha, 0.0)
    head_nodes = c * head.nodes
    head_weights = c ** (alpha + 1.0) * head.weights * np.exp(-head_nodes)

    tail = gauss_laguerre(n, 0.0)
    tail_nodes = tail.nodes + c
    tail_weights = tail.weights * math.exp(-c) * tail_nodes ** alpha

    return _freeze(np.concatenate([head_nodes, tail_nodes]),
                   np.concatenate([head_weights, tail_weights]))


def gauss_laguerre_split(n: int, alpha: float, c: Optional[float] = None) -> QuadratureRule:
    """
    Rule for u^alpha e^-u on [0, inf) split at c: N Gauss-Jacobi nodes on
    [0, c] and N shifted Gauss-Laguerre nodes on [c, inf).

    Not a Gauss rule for the full weight, so exactness_degree is None.
    """
    _check_size(n)
    c = Config.LAGUERRE_SPLIT if c is None else float(c)
    if not alpha > -1:
        raise DomainError(f"laguerre weight needs alpha > -1, got {alpha}")
    if not c > 0:
        raise DomainError(f"split point must be positive, got {c}")
    nodes, weights = _laguerre_split_cached(n, float(alpha), c)
    return QuadratureRule("laguerre_split", (float(alpha), c), nodes, weights, None)


def integrate_converged(rule_factory: Callable[[int], QuadratureRule],
                        f: Callable[[np.ndarray], np.ndarray],
                        rtol: Optional[float] = None,
                        n0: Optional[int] = None,
                        nmax: Optional[int] = None) -> Integration:
    """
    Integrate f with rules of size N0, 2N0, 4N0, ... until two successive
    values agree to rtol.

    Returns:
        Integration(value, achieved_rtol, n_used)

    Raises:
        ConvergenceError: N_max reached first; carries the last two values
    """
    rtol = Config.RTOL if rtol is None else rtol
    n = Config.QUAD_N0 if n0 is None else n0
    nmax = Config.QUAD_NMAX if nmax is None else nmax
    if not rtol > 0:
        raise DomainError(f"rtol must be positive, got {rtol}")
    if n > nmax:
        raise DomainError(f"N0={n} exceeds N_max={nmax}")

    previous = None
    family = "unknown"
    while True:
        rule = rule_factory(n)
        family = rule.kind
        value = rule.integrate(f)
        if previous is not None:
            delta = abs(value - previous)
            achieved = delta / abs(value) if value != 0 else delta
            if achieved <= rtol:
                track_quadrature(family, n)
                logger.debug(f"{family} converged at N={n}, rtol={achieved:.3e}")
                return Integration(value, achieved, n)
        if 2 * n > nmax:
            raise ConvergenceError(
                f"{family} quadrature did not reach rtol={rtol} by N={n}",
                method=family,
                diagnostics={"N": n, "value": value, "previous": previous, "rtol": rtol},
            )
        previous = value
        n *= 2
