"""
Runtime configuration.
"""
import os
from pathlib import Path

# Load environment variables from .env file (if exists)
from dotenv import load_dotenv
env_path = Path(__file__).parent.parent / '.env'
if env_path.exists():
    load_dotenv(env_path, override=True)  # Override system env vars with .env values


class Config:
    """Numerical defaults, all overridable from the environment or CLI flags."""

    # Quadrature doubling driver
    RTOL = float(os.environ.get("ERGOCAP_RTOL", 1e-10))
    QUAD_N0 = int(os.environ.get("ERGOCAP_QUAD_N0", 64))
    QUAD_NMAX = int(os.environ.get("ERGOCAP_QUAD_NMAX", 4096))

    # Gauss 2F1 series
    SERIES_TERM_CAP = int(os.environ.get("ERGOCAP_SERIES_TERM_CAP", 1_000_000))
    SERIES_RTOL = 1e-14

    # Moment series default truncation
    MOMENT_TERMS = 400

    # Monte Carlo oracle
    SAMPLES = int(os.environ.get("ERGOCAP_SAMPLES", 100_000))
    SEED = int(os.environ.get("ERGOCAP_SEED", 42))
    CHUNK_SIZE = int(os.environ.get("ERGOCAP_CHUNK_SIZE", 10_000))

    # Split point of the Gaussian-channel rule [0, c] + [c, inf)
    LAGUERRE_SPLIT = 1.0

    # Resource guard
    MEMORY_MIN_AVAILABLE_MB = int(os.environ.get("ERGOCAP_MEMORY_MIN_AVAILABLE_MB", 64))

    # Logging
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "WARNING").upper()


def thread_cap() -> int:
    """
    Parallelism cap from ERGOCAP_THREADS (defaults to the CPU count).

    Raises:
        ValueError: if the variable is set but is not a positive integer
    """
    raw = os.environ.get("ERGOCAP_THREADS")
    if raw is None or not raw.strip():
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"ERGOCAP_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"ERGOCAP_THREADS must be a positive integer, got {raw!r}")
    return value
