"""
Parameter sweeps: single-point evaluation, sweep grids, figure presets and
the thread-pool runner that fans points out while keeping output order.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from channel import (CapacityEstimate, ChannelDims, GaussianDims, Method, Snr, SnrScaling,
                     snr_db_to_linear)
from config import thread_cap
from errors import DomainError
from gaussian_capacity import capacity_laguerre_reference, capacity_theorem2
from jacobi_capacity import ergodic_capacity
from mc_oracle import mc_capacity_gaussian, mc_capacity_jacobi_haar, mc_capacity_jacobi_wishart
from report import OutputRow, row_from_estimate

logger = logging.getLogger(__name__)

CHANNELS = ("jacobi", "gaussian")
AXES = ("snr_db", "m_r", "m_t")

METHOD_ALIASES = {
    "cd": "cd_reference",
    "moment": "moment_series",
    "regrouped": "regrouped_series",
    "laguerre": "laguerre_reference",
    "haar": "mc",
    "wishart": "mc_wishart",
}

CHANNEL_METHODS = {
    "jacobi": ("theorem1", "cd_reference", "moment_series", "regrouped_series", "mc", "mc_wishart"),
    "gaussian": ("theorem2", "laguerre_reference", "mc"),
}

DEFAULT_METHODS = {
    "jacobi": ("theorem1", "cd_reference", "mc"),
    "gaussian": ("theorem2", "laguerre_reference", "mc"),
}


def canonical_method(channel: str, name: str) -> str:
    """Resolve aliases and check the method applies to the channel."""
    method = METHOD_ALIASES.get(name, name)
    if method not in CHANNEL_METHODS[channel]:
        raise DomainError(
            f"method {name!r} is not available for the {channel} channel; "
            f"choose from {', '.join(CHANNEL_METHODS[channel])}"
        )
    return method


@dataclass(frozen=True)
class Request:
    """One capacity evaluation: a parameter point plus a method."""
    channel: str
    method: str
    mt: int
    mr: int
    snr_db: float
    m: Optional[int] = None
    scaling: SnrScaling = SnrScaling.PER_MODE
    units: str = "nats"
    rtol: Optional[float] = None
    terms: Optional[int] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    chunk_size: Optional[int] = None

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise DomainError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if self.channel == "jacobi" and self.m is None:
            raise DomainError("the jacobi channel needs --m")


def _jacobi_estimate(req: Request, snr: Snr, mc_workers: Optional[int]) -> CapacityEstimate:
    dims = ChannelDims(req.m, req.mt, req.mr)
    if req.method == "mc":
        return mc_capacity_jacobi_haar(dims, snr, req.samples, req.seed, req.chunk_size,
                                       mc_workers).to_capacity()
    if req.method == "mc_wishart":
        n, m1 = min(req.mt, req.mr), max(req.mt, req.mr)
        return mc_capacity_jacobi_wishart(m1, req.m - m1, n, snr.per_mode(req.mt), req.samples,
                                          req.seed, req.chunk_size, mc_workers).to_capacity()
    return ergodic_capacity(dims, snr, Method(req.method), req.rtol, req.terms)


def _gaussian_estimate(req: Request, snr: Snr, mc_workers: Optional[int]) -> CapacityEstimate:
    dims = GaussianDims(req.mt, req.mr)
    if req.method == "theorem2":
        return capacity_theorem2(dims, snr, req.rtol)
    if req.method == "laguerre_reference":
        return capacity_laguerre_reference(dims, snr, req.rtol)
    return mc_capacity_gaussian(dims, snr, req.samples, req.seed, req.chunk_size,
                                mc_workers).to_capacity()


def evaluate(req: Request, mc_workers: Optional[int] = None) -> OutputRow:
    """
    Evaluate one request into an output row.

    mc_workers caps the Monte Carlo chunk pool (default: ERGOCAP_THREADS).
    """
    method = canonical_method(req.channel, req.method)
    if method != req.method:
        req = replace(req, method=method)
    snr = Snr(snr_db_to_linear(req.snr_db), req.scaling)
    if req.channel == "jacobi":
        estimate = _jacobi_estimate(req, snr, mc_workers)
    else:
        estimate = _gaussian_estimate(req, snr, mc_workers)
    return row_from_estimate(estimate, req.m, req.mt, req.mr, req.snr_db, req.scaling.value, req.units)


def parse_range(text: str) -> Tuple[float, float, float]:
    """'a:b:s' -> (a, b, s)"""
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"range must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise DomainError(f"range must be numeric, got {text!r}") from None
    return start, stop, step


@dataclass(frozen=True)
class SweepSpec:
    """A one-axis sweep over snr_db, m_r or m_t; `fixed` holds the rest."""
    axis: str
    start: float
    stop: float
    step: float
    fixed: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.step > 0:
            raise DomainError(f"sweep step must be positive, got {self.step}")
        if self.start > self.stop:
            raise DomainError(f"sweep start {self.start} exceeds stop {self.stop}")
        if self.axis != "snr_db" and not all(float(v).is_integer()
                                              for v in (self.start, self.stop, self.step)):
            raise DomainError(f"{self.axis} sweeps need integer start, stop and step")

    def values(self) -> List[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        values = [round(self.start + i * self.step, 12) for i in range(count)]
        if self.axis != "snr_db":
            return [int(v) for v in values]
        return values

    def points(self) -> List[Dict[str, float]]:
        """Parameter dicts with keys m, mt, mr, snr_db."""
        key = {"snr_db": "snr_db", "m_r": "mr", "m_t": "mt"}[self.axis]
        return [{**self.fixed, key: value} for value in self.values()]


def _db_grid(start: int, stop: int, step: int) -> List[float]:
    return [float(v) for v in range(start, stop + 1, step)]


def preset_points(name: str) -> Tuple[str, List[Dict[str, float]]]:
    """
    Parameter grids of the four reference figures.

    fig1  jacobi   m=20, m_t=m_r in 1..4, 0..30 dB step 5
    fig2  jacobi   m=25, 10 dB, m_t in {2,3}, m_r in m_t..10
    fig3  gaussian m_t=m_r in 1..4, 0..30 dB step 5
    fig4  gaussian 10 dB, m_t in 1..4, m_r in m_t..10
    """
    if name == "fig1":
        return "jacobi", [{"m": 20, "mt": k, "mr": k, "snr_db": db}
                          for k in range(1, 5) for db in _db_grid(0, 30, 5)]
    if name == "fig2":
        return "jacobi", [{"m": 25, "mt": mt, "mr": mr, "snr_db": 10.0}
                          for mt in (2, 3) for mr in range(mt, 11)]
    if name == "fig3":
        return "gaussian", [{"mt": k, "mr": k, "snr_db": db}
                            for k in range(1, 5) for db in _db_grid(0, 30, 5)]
    if name == "fig4":
        return "gaussian", [{"mt": mt, "mr": mr, "snr_db": 10.0}
                            for mt in range(1, 5) for mr in range(mt, 11)]
    raise DomainError(f"unknown preset {name!r}; choose fig1, fig2, fig3 or fig4")


def build_requests(channel: str, points: Sequence[Dict[str, float]], methods: Sequence[str],
                   **options) -> List[Request]:
    """Point-major list: every method for point 0, then point 1, ..."""
    resolved = [canonical_method(channel, name) for name in methods]
    requests = []
    for point in points:
        for method in resolved:
            requests.append(Request(
                channel=channel,
                method=method,
                m=int(point["m"]) if point.get("m") is not None else None,
                mt=int(point["mt"]),
                mr=int(point["mr"]),
                snr_db=float(point["snr_db"]),
                **options,
            ))
    return requests


class SweepRunner:
    """
    Evaluates requests on a thread pool; rows come back in request order
    whatever the completion order.
    """

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or thread_cap()

    def run(self, requests: Sequence[Request]) -> List[OutputRow]:
        if not requests:
            return []
        workers = min(self.max_workers, len(requests))
        # a parallel sweep keeps each Monte Carlo row on its own worker thread
        mc_workers = 1 if workers > 1 else None
        logger.info(f"Sweeping {len(requests)} points on {workers} threads")
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(evaluate, req, mc_workers) for req in requests]
            rows = []
            for req, future in zip(requests, futures):
                try:
                    rows.append(future.result())
                except Exception as e:
                    logger.error(f"Failed {req.method} at m={req.m}, mt={req.mt}, mr={req.mr}, "
                                 f"snr_db={req.snr_db}: {e}")
                    for pending in futures:
                        pending.cancel()
                    raise
        return rows
