"""
Dense complex linear algebra for the samplers and the quadrature rules.

Random draws come from RngStream, a PCG64 generator keyed by
(seed, stream_id). Matrices are numpy arrays; every sampler and the
log-determinant accept a leading batch axis so a Monte Carlo chunk is a
single LAPACK call.

Haar sampling: if Z = QR with Z complex Ginibre, Q alone is not Haar because
LAPACK fixes the phases of diag(R) by convention. Multiplying column j of Q
by r_jj/|r_jj| makes R's diagonal positive, which makes the factorization
unique; uniqueness plus the unitary invariance of the Ginibre law then gives
Q the Haar law. The same holds for the reduced QR of an m x k Ginibre
block, whose Q is distributed as the first k columns of a Haar unitary.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg as sla

from errors import ConvergenceError, DimensionError, DomainError
from resource_guard import ensure_memory

logger = logging.getLogger(__name__)

# Eigenvector matrices above this size go through the memory guard
_GUARD_BYTES = 1 << 20


class RngStream:
    """
    Seedable, splittable random stream.

    (seed, stream_id) fully determines the sequence; distinct stream ids
    map to independent SeedSequence children.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise DomainError(f"seed and stream_id must be non-negative, got {seed}, {stream_id}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def split(self, stream_id: int) -> "RngStream":
        """Fresh stream with the same seed and another id."""
        return RngStream(self.seed, stream_id)

    def standard_normal(self, shape) -> np.ndarray:
        return self._gen.standard_normal(shape)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _batch_shape(size: Optional[int]) -> Tuple[int, ...]:
    return () if size is None else (int(size),)


def complex_gaussian(rows: int, cols: int, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
    """Circular complex Gaussian matrix, E|z|^2 = 1, optionally batched."""
    if rows < 1 or cols < 1:
        raise DimensionError(f"matrix shape must be positive, got {rows}x{cols}")
    shape = _batch_shape(size) + (rows, cols)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(0.5)


def haar_unitary_batch(m: int, rng: RngStream, size: Optional[int] = None,
                       columns: Optional[int] = None) -> Tuple[np.ndarray, int]:
    """
    Draw Haar unitaries (or their first `columns` columns).

    Returns:
        (Q, resampled): Q has shape (size, m, columns) or (m, columns);
        resampled counts draws redrawn because diag(R) had a zero entry.
    """
    k = m if columns is None else columns
    if m < 1 or not 1 <= k <= m:
        raise DimensionError(f"cannot draw {k} Haar columns of size {m}")

    z = complex_gaussian(m, k, rng, size)
    resampled = 0
    while True:
        q, r = np.linalg.qr(z)
        d = np.diagonal(r, axis1=-2, axis2=-1)
        bad = np.abs(d) == 0
        if not bad.any():
            break
        rows = bad.any(axis=-1)
        count = int(rows.sum()) if rows.ndim else 1
        resampled += count
        logger.warning(f"Redrawing {count} Haar sample(s) with singular R")
        if rows.ndim:
            z[rows] = complex_gaussian(m, k, rng, count)
        else:
            z = complex_gaussian(m, k, rng)

    q = q * (d / np.abs(d))[..., np.newaxis, :]
    return q, resampled


def haar_unitary(m: int, rng: RngStream) -> np.ndarray:
    """One m x m Haar-distributed unitary."""
    return haar_unitary_batch(m, rng)[0]


def corner(u: np.ndarray, m_r: int, m_t: int) -> np.ndarray:
    """Upper-left m_r x m_t block (over the last two axes)."""
    rows, cols = u.shape[-2:]
    if not (1 <= m_r <= rows and 1 <= m_t <= cols):
        raise DimensionError(f"corner {m_r}x{m_t} does not fit in a {rows}x{cols} matrix")
    return u[..., :m_r, :m_t]


def cholesky_logdet(g: np.ndarray) -> Tuple[Union[float, np.ndarray], np.ndarray]:
    """
    ln det of Hermitian positive definite matrices via Cholesky.

    Returns:
        (logdet, failed): failed flags matrices that are not numerically
        positive definite; their logdet entry is NaN.
    """
    batched = g.ndim > 2
    stack = g if batched else g[np.newaxis]
    try:
        chol = np.linalg.cholesky(stack)
        failed = np.zeros(stack.shape[0], dtype=bool)
    except np.linalg.LinAlgError:
        chol = np.empty_like(stack)
        failed = np.zeros(stack.shape[0], dtype=bool)
        for i, mat in enumerate(stack):
            try:
                chol[i] = np.linalg.cholesky(mat)
            except np.linalg.LinAlgError:
                failed[i] = True
                chol[i] = np.nan
    diag = np.diagonal(chol, axis1=-2, axis2=-1).real
    logdet = 2.0 * np.sum(np.log(diag), axis=-1)
    if batched:
        return logdet, failed
    return float(logdet[0]), failed


def logdet_id_plus_scaled_gram(h: np.ndarray, c: float) -> Union[float, np.ndarray]:
    """
    ln det(I + c H^H H), batched over leading axes.

    The smaller of H^H H and H H^H is factored; both share their nonzero
    eigenvalues.

    Raises:
        DomainError: c < 0 or the Gram matrix is not positive definite
    """
    if not c >= 0:
        raise DomainError(f"scale must be >= 0, got {c}")
    if c == 0:
        return 0.0 if h.ndim == 2 else np.zeros(h.shape[:-2])

    rows, cols = h.shape[-2:]
    hh = np.conj(np.swapaxes(h, -1, -2))
    gram = hh @ h if cols <= rows else h @ hh
    g = np.eye(gram.shape[-1]) + c * gram
    logdet, failed = cholesky_logdet(g)
    if failed.any():
        raise DomainError(f"I + c H^H H is not positive definite for {int(failed.sum())} matrices")
    return logdet


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix by its diagonal and off-diagonal."""
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if n < 1 or len(self.offdiag) != n - 1:
            raise DimensionError(
                f"tridiagonal needs N >= 1 and N-1 off-diagonals, got {n} and {len(self.offdiag)}"
            )

    @property
    def size(self) -> int:
        return len(self.diag)


def tridiag_eigen(t: SymTridiagonal) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues (ascending) and |first component| of each unit eigenvector.

    Raises:
        ConvergenceError: LAPACK did not converge
    """
    n = t.size
    if n == 1:
        return np.array([float(t.diag[0])]), np.array([1.0])
    if n * n * 8 > _GUARD_BYTES:
        ensure_memory(n * n * 8, f"tridiagonal eigenvectors N={n}")
    try:
        w, v = sla.eigh_tridiagonal(np.asarray(t.diag, dtype=float), np.asarray(t.offdiag, dtype=float))
    except (np.linalg.LinAlgError, sla.LinAlgError) as e:
        raise ConvergenceError(
            f"tridiagonal eigensolver failed: {e}", method="tridiag_eigen", diagnostics={"N": n}
        ) from e
    return w, np.abs(v[0, :])
