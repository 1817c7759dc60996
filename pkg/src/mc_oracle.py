"""
Seeded Monte Carlo capacity estimators.

Samples are split into fixed-size chunks; chunk i draws from
RngStream(seed, i), so the estimate depends only on (seed, samples,
chunk_size) and not on how many threads ran the chunks. Chunk results are
gathered in chunk order and reduced with exactly rounded sums.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from channel import CapacityEstimate, ChannelDims, GaussianDims, Method, Snr
from config import Config, thread_cap
from errors import DimensionError, DomainError
from linalg import (RngStream, cholesky_logdet, complex_gaussian, corner, haar_unitary_batch,
                    logdet_id_plus_scaled_gram)
from metrics import track_capacity, track_mc_samples
from resource_guard import ensure_memory

logger = logging.getLogger(__name__)

ChunkSampler = Callable[[RngStream, int], Tuple[np.ndarray, int]]


@dataclass
class McEstimate:
    """Sample mean of ln det(I + rho_eff H^H H) with its standard error."""
    mean: float
    stderr: float
    samples: int
    seed: int
    chunk_size: int
    ensemble: str
    rho_eff: float
    resampled: int = 0

    def to_capacity(self) -> CapacityEstimate:
        method = Method.MC_WISHART if self.ensemble == "wishart" else Method.MC
        return CapacityEstimate(
            nats=self.mean,
            method=method,
            err=self.stderr,
            meta={"samples": self.samples, "seed": self.seed, "chunk_size": self.chunk_size,
                  "ensemble": self.ensemble, "rho_eff": self.rho_eff,
                  "resampled": self.resampled, "err_kind": "stderr"},
        )

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "chunk_size": self.chunk_size,
            "ensemble": self.ensemble,
            "rho_eff": self.rho_eff,
            "resampled": self.resampled,
        }


def _chunk_sizes(samples: int, chunk_size: int) -> List[int]:
    full, rest = divmod(samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def run_chunks(sampler: ChunkSampler, samples: int, seed: int, ensemble: str, rho_eff: float,
               bytes_per_sample: int, chunk_size: Optional[int] = None,
               max_workers: Optional[int] = None) -> McEstimate:
    """
    Evaluate `sampler` over all chunks and reduce to an McEstimate.

    Args:
        sampler: (rng, count) -> (per-sample values, redrawn count)
        bytes_per_sample: working memory of one sample, for the guard
    """
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
        raise DomainError(f"samples must be an integer >= 2, got {samples!r}")
    if seed < 0:
        raise DomainError(f"seed must be non-negative, got {seed}")
    chunk_size = Config.CHUNK_SIZE if chunk_size is None else chunk_size
    if chunk_size < 1:
        raise DomainError(f"chunk size must be positive, got {chunk_size}")

    sizes = _chunk_sizes(samples, chunk_size)
    workers = min(max_workers or thread_cap(), len(sizes))

    def run_one(index: int) -> Tuple[np.ndarray, int]:
        count = sizes[index]
        ensure_memory(count * bytes_per_sample, f"{ensemble} chunk {index}")
        return sampler(RngStream(seed, index), count)

    logger.debug(f"{ensemble}: {samples} samples in {len(sizes)} chunks on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(run_one, i) for i in range(len(sizes))]
        results = [future.result() for future in futures]

    values = np.concatenate([chunk for chunk, _ in results])
    resampled = sum(redrawn for _, redrawn in results)
    if resampled:
        logger.warning(f"{ensemble}: redrew {resampled} degenerate sample(s)")

    mean = math.fsum(values) / samples
    variance = math.fsum((values - mean) ** 2) / (samples - 1)
    track_mc_samples(ensemble, samples, resampled)
    return McEstimate(mean=mean, stderr=math.sqrt(variance / samples), samples=samples, seed=seed,
                      chunk_size=chunk_size, ensemble=ensemble, rho_eff=rho_eff, resampled=resampled)


@track_capacity("mc")
def mc_capacity_jacobi_haar(dims: ChannelDims, snr: Snr, samples: Optional[int] = None,
                            seed: Optional[int] = None, chunk_size: Optional[int] = None,
                            max_workers: Optional[int] = None) -> McEstimate:
    """
    H = m_r x m_t corner of an m x m Haar unitary. Valid for every m,
    including m < m_t + m_r.
    """
    rho = snr.effective(dims.m_t)

    def sampler(rng: RngStream, count: int) -> Tuple[np.ndarray, int]:
        q, redrawn = haar_unitary_batch(dims.m, rng, size=count, columns=dims.m_t)
        return np.atleast_1d(logdet_id_plus_scaled_gram(corner(q, dims.m_r, dims.m_t), rho)), redrawn

    return run_chunks(sampler, Config.SAMPLES if samples is None else samples,
                      Config.SEED if seed is None else seed, "haar", rho,
                      bytes_per_sample=48 * dims.m * dims.m_t, chunk_size=chunk_size,
                      max_workers=max_workers)


@track_capacity("mc_wishart")
def mc_capacity_jacobi_wishart(m1: int, m2: int, n: int, snr: Snr, samples: Optional[int] = None,
                               seed: Optional[int] = None, chunk_size: Optional[int] = None,
                               max_workers: Optional[int] = None) -> McEstimate:
    """
    Wishart-ratio construction: X = A^H A, Y = B^H B with A m1 x n and
    B m2 x n. ln det(I + rho J) = ln det(X + Y + rho X) - ln det(X + Y),
    so J is never formed. Ensemble parameters a = m1-n+1, b = m2-n+1.
    """
    if n < 1 or m1 < n or m2 < n:
        raise DimensionError(f"Wishart ratio needs m1 >= n and m2 >= n >= 1, got {m1}, {m2}, {n}")
    rho = snr.effective(n)

    def draw(rng: RngStream, count: int) -> Tuple[np.ndarray, np.ndarray]:
        a = complex_gaussian(m1, n, rng, count)
        b = complex_gaussian(m2, n, rng, count)
        x = np.conj(np.swapaxes(a, -1, -2)) @ a
        y = np.conj(np.swapaxes(b, -1, -2)) @ b
        return x, x + y

    def sampler(rng: RngStream, count: int) -> Tuple[np.ndarray, int]:
        x, s = draw(rng, count)
        redrawn = 0
        while True:
            num, failed_num = cholesky_logdet(s + rho * x)
            den, failed_den = cholesky_logdet(s)
            failed = failed_num | failed_den
            if not failed.any():
                return num - den, redrawn
            bad = int(failed.sum())
            redrawn += bad
            x[failed], s[failed] = draw(rng, bad)

    return run_chunks(sampler, Config.SAMPLES if samples is None else samples,
                      Config.SEED if seed is None else seed, "wishart", rho,
                      bytes_per_sample=32 * (m1 + m2) * n + 96 * n * n, chunk_size=chunk_size,
                      max_workers=max_workers)


@track_capacity("mc")
def mc_capacity_gaussian(dims: GaussianDims, snr: Snr, samples: Optional[int] = None,
                         seed: Optional[int] = None, chunk_size: Optional[int] = None,
                         max_workers: Optional[int] = None) -> McEstimate:
    """H with i.i.d. CN(0, 1) entries, m_r x m_t."""
    rho = snr.effective(dims.m_t)

    def sampler(rng: RngStream, count: int) -> Tuple[np.ndarray, int]:
        h = complex_gaussian(dims.m_r, dims.m_t, rng, count)
        return np.atleast_1d(logdet_id_plus_scaled_gram(h, rho)), 0

    return run_chunks(sampler, Config.SAMPLES if samples is None else samples,
                      Config.SEED if seed is None else seed, "gaussian", rho,
                      bytes_per_sample=48 * dims.m_r * dims.m_t, chunk_size=chunk_size,
                      max_workers=max_workers)
