"""
Self-test: fast invariant checks run by `ergocap selftest`.

Each check returns a status dict; the report is "healthy" only when every
check passes.
"""

import logging
import math
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Tuple

from channel import ChannelDims, GaussianDims, Method, Snr
from gaussian_capacity import capacity_laguerre_reference, capacity_theorem2, jacobi_large_b_gap
from jacobi_capacity import (JacobiParams, capacity_cd_reference, capacity_decomposed,
                             capacity_moment_series, capacity_theorem1, ergodic_capacity,
                             jacobi_params, prop1_rhs)
from mc_oracle import mc_capacity_jacobi_haar
from quadrature import gauss_jacobi01, gauss_laguerre
from resource_guard import memory_status
from specfun import HypergeometricArgs, dilog_inner, gauss_2f1, jacobi_p, ln_gamma, pochhammer

logger = logging.getLogger(__name__)

VERSION = "0.1.0"

TIGHT_RTOL = 1e-12


def rho_second_operator(f: Callable[[float], float], rho: float, h: float = 1e-3) -> float:
    """d/drho (rho df/drho) = f' + rho f'' by five-point central differences."""
    fm2, fm1, f0, fp1, fp2 = (f(rho + k * h) for k in (-2, -1, 0, 1, 2))
    first = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)
    second = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h)
    return first + rho * second


def _result(passed: bool, **detail) -> Dict[str, Any]:
    return {"status": "pass" if passed else "fail", **detail}


def _rel(x: float, y: float) -> float:
    return abs(x - y) / max(1.0, abs(y))


def check_special_functions() -> Dict[str, Any]:
    errors = {
        "dilog_inner(1)": _rel(dilog_inner(1.0), math.pi ** 2 / 12),
        "2F1(1,1;2;-0.5)": _rel(gauss_2f1(HypergeometricArgs(1, 1, 2, -0.5)), 2 * math.log(1.5)),
        "ln_gamma(10)": _rel(ln_gamma(10.0), math.log(362880)),
        "pochhammer(-2,3)": abs(pochhammer(-2, 3)),
    }
    q, al, be, x = 5, 1.0, 3.0, 0.3
    via_2f1 = pochhammer(al + 1, q) / math.factorial(q) * gauss_2f1(
        HypergeometricArgs(-q, q + al + be + 1, al + 1, (1 - x) / 2))
    errors["jacobi_p vs 2F1"] = _rel(jacobi_p(q, al, be, x), via_2f1)
    return _result(max(errors.values()) <= 1e-11, errors=errors)


def check_quadrature_exactness() -> Dict[str, Any]:
    rule = gauss_jacobi01(16, 1.0, 2.0)
    worst = 0.0
    for k in range(2 * 16):
        exact = math.exp(ln_gamma(k + 2.0) + ln_gamma(3.0) - ln_gamma(k + 5.0))
        worst = max(worst, abs(rule.integrate(lambda u: u ** k) - exact) / exact)
    lag = gauss_laguerre(16, 0.0).integrate(lambda u: u ** 5)
    worst = max(worst, abs(lag - 120.0) / 120.0)
    return _result(worst <= 1e-12, max_rel_error=worst)


def check_method_agreement() -> Dict[str, Any]:
    p = jacobi_params(ChannelDims(20, 3, 3))
    snr = Snr(10.0)
    t1 = capacity_theorem1(p, snr, TIGHT_RTOL).nats
    cd = capacity_cd_reference(p, snr, TIGHT_RTOL).nats
    dims = GaussianDims(2, 4)
    t2 = capacity_theorem2(dims, Snr(5.0), TIGHT_RTOL).nats
    lr = capacity_laguerre_reference(dims, Snr(5.0), TIGHT_RTOL).nats
    jac, gau = _rel(t1, cd), _rel(t2, lr)
    return _result(max(jac, gau) <= 1e-8, jacobi=jac, gaussian=gau, theorem1=t1, theorem2=t2)


def check_prop1_identity() -> Dict[str, Any]:
    p = JacobiParams(2.0, 3.0, 2)
    rho = 0.3
    lhs = rho_second_operator(lambda r: capacity_theorem1(p, Snr(r), TIGHT_RTOL).nats, rho)
    rhs = prop1_rhs(p, rho)
    err = abs(lhs - rhs) / abs(rhs)
    return _result(err <= 1e-5, rel_error=err)


def check_moment_series() -> Dict[str, Any]:
    p = JacobiParams(1.0, 3.0, 2)
    series = capacity_moment_series(p, 0.5, 200)
    direct = capacity_theorem1(p, Snr(0.5), TIGHT_RTOL).nats
    diff = abs(series.nats - direct)
    return _result(diff <= max(1e-10, series.err), abs_error=diff, tail_bound=series.err)


def check_large_b_limit(quick: bool) -> Dict[str, Any]:
    bs = (100, 1000) if quick else (100, 1000, 10000)
    gaps = [jacobi_large_b_gap(2, 2, 0.5, b) for b in bs]
    decreasing = all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
    return _result(decreasing, b=list(bs), gaps=gaps)


def check_decomposition() -> Dict[str, Any]:
    rho = 5.0
    full = capacity_decomposed(ChannelDims(2, 2, 2), Snr(rho)).nats
    err = abs(full - 2 * math.log1p(rho))
    partial = ergodic_capacity(ChannelDims(3, 2, 2), Snr(rho), Method.THEOREM1).nats
    # m=3: one unit-modulus mode plus a (1, 1) complement with eigenvalue in (0, 1)
    bounded = math.log1p(rho) < partial < full
    return _result(err <= 1e-15 and bounded, degenerate_error=err, m3_value=partial)


def check_monte_carlo() -> Dict[str, Any]:
    est = mc_capacity_jacobi_haar(ChannelDims(2, 1, 1), Snr(1.0), samples=20_000, seed=42)
    exact = 2 * math.log(2) - 1
    z = abs(est.mean - exact) / est.stderr
    return _result(z <= 4.0, mean=est.mean, stderr=est.stderr, z=z)


def _guarded(name: str, check: Callable[[], Dict[str, Any]]) -> Dict[str, Any]:
    try:
        return check()
    except Exception as e:
        logger.error(f"Self-test check {name} raised: {e}")
        return {"status": "fail", "message": f"{type(e).__name__}: {e}"}


def get_selftest_report(quick: bool = False) -> Dict[str, Any]:
    """
    Run every check and collect a report.

    Args:
        quick: skip Monte Carlo and the largest b of the limit check
    """
    checks: List[Tuple[str, Callable[[], Dict[str, Any]]]] = [
        ("special_functions", check_special_functions),
        ("quadrature_exactness", check_quadrature_exactness),
        ("method_agreement", check_method_agreement),
        ("prop1_identity", check_prop1_identity),
        ("moment_series", check_moment_series),
        ("large_b_limit", lambda: check_large_b_limit(quick)),
        ("decomposition", check_decomposition),
    ]
    if not quick:
        checks.append(("monte_carlo", check_monte_carlo))

    results = {name: _guarded(name, check) for name, check in checks}
    healthy = all(r["status"] == "pass" for r in results.values())
    return {
        "status": "healthy" if healthy else "unhealthy",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "version": VERSION,
        "memory": memory_status(),
        "checks": results,
    }
