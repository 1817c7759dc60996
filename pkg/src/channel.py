"""
Shared channel and result types.

Both capacity engines, the Monte Carlo oracle and the CLI speak in these
records. All capacities are carried in nats; bits only appear at the CLI
boundary.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Tuple

from errors import ConvergenceError, DimensionError, DomainError


class SnrScaling(Enum):
    """Whether rho multiplies the Gram matrix directly or rho/m_t does."""
    PER_MODE = "per_mode"          # rho multiplies H H* directly
    TOTAL_POWER = "total_power"    # rho/m_t inside the determinant


class Method(Enum):
    """Evaluation route that produced a capacity value."""
    THEOREM1 = "theorem1"
    CD_REFERENCE = "cd_reference"
    MOMENT_SERIES = "moment_series"
    REGROUPED_SERIES = "regrouped_series"
    DECOMPOSITION = "decomposition"
    THEOREM2 = "theorem2"
    LAGUERRE_REFERENCE = "laguerre_reference"
    MC = "mc"
    MC_WISHART = "mc_wishart"


def _check_positive_int(name: str, value: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise DimensionError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class ChannelDims:
    """Fiber with m modes, m_t of them excited, m_r of them received."""
    m: int
    m_t: int
    m_r: int

    def __post_init__(self):
        _check_positive_int("m", self.m)
        _check_positive_int("m_t", self.m_t)
        _check_positive_int("m_r", self.m_r)
        if self.m_t > self.m or self.m_r > self.m:
            raise DimensionError(
                f"addressed modes exceed fiber modes: m={self.m}, m_t={self.m_t}, m_r={self.m_r}"
            )

    @property
    def needs_decomposition(self) -> bool:
        return self.m < self.m_t + self.m_r

    def swapped(self) -> "ChannelDims":
        return ChannelDims(self.m, self.m_r, self.m_t)


@dataclass(frozen=True)
class GaussianDims:
    """Wireless channel with m_t transmit and m_r receive antennas."""
    m_t: int
    m_r: int

    def __post_init__(self):
        _check_positive_int("m_t", self.m_t)
        _check_positive_int("m_r", self.m_r)

    def canonical(self) -> Tuple[int, int]:
        """Return (n, alpha): matrix size min(m_t, m_r) and |m_r - m_t|."""
        n = min(self.m_t, self.m_r)
        return n, max(self.m_t, self.m_r) - n


@dataclass(frozen=True)
class Snr:
    """Linear signal-to-noise ratio with its scaling convention."""
    rho: float
    scaling: SnrScaling = SnrScaling.PER_MODE

    def __post_init__(self):
        if not math.isfinite(self.rho) or self.rho < 0:
            raise DomainError(f"rho must be finite and >= 0, got {self.rho!r}")
        if not isinstance(self.scaling, SnrScaling):
            object.__setattr__(self, "scaling", SnrScaling(self.scaling))

    def effective(self, m_t: int) -> float:
        """rho_eff for a channel with m_t transmit modes (before any swap)."""
        if self.scaling is SnrScaling.TOTAL_POWER:
            return self.rho / m_t
        return self.rho

    def per_mode(self, m_t: int) -> "Snr":
        """Equivalent per-mode record, used when dims get canonicalized."""
        return Snr(self.effective(m_t), SnrScaling.PER_MODE)


@dataclass
class CapacityEstimate:
    """Ergodic capacity value with the method that produced it."""
    nats: float
    method: Method
    err: float = 0.0
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.nats >= 0:
            raise DomainError(f"capacity must be >= 0, got {self.nats!r}")
        if not self.err >= 0:
            raise DomainError(f"error estimate must be >= 0, got {self.err!r}")

    @property
    def bits(self) -> float:
        return self.nats / math.log(2)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "nats": self.nats,
            "method": self.method.value,
            "err": self.err,
            "meta": dict(self.meta),
        }


def nonnegative_capacity(value: float, abs_err: float, method: str) -> float:
    """
    Clamp a capacity that came out negative by round-off only.

    Raises:
        ConvergenceError: the negative part exceeds the error estimate
    """
    if value >= 0:
        return value
    if -value <= abs_err + 1e-15:
        return 0.0
    raise ConvergenceError(
        f"{method} produced a negative capacity {value:.6e}",
        method=method,
        diagnostics={"value": value, "abs_err": abs_err},
    )


def snr_db_to_linear(db: float) -> float:
    """10^(db/10)"""
    return 10.0 ** (db / 10.0)
