"""
Resource Guard - refuses allocations that would exhaust memory.

Large Monte Carlo chunks and big Golub-Welsch eigenvector matrices are the
only allocations of note. Before making one, callers ask the guard; when the
request would leave less than the configured floor available, a
ResourceLimitError is raised instead of letting the process swap or die.

Usage:
    from resource_guard import ensure_memory

    ensure_memory(chunk * m * m * 16, "haar chunk")
"""

import logging

import psutil

from config import Config
from errors import ResourceLimitError

logger = logging.getLogger(__name__)


def memory_status() -> dict:
    """Get current memory usage status."""
    try:
        mem = psutil.virtual_memory()
        return {
            'percent_used': mem.percent,
            'available_mb': mem.available / (1024 * 1024),
            'total_mb': mem.total / (1024 * 1024),
        }
    except Exception as e:
        logger.warning(f"Failed to get memory status: {e}")
        return {'percent_used': 0.0, 'available_mb': float('inf'), 'total_mb': float('inf')}


def ensure_memory(nbytes: int, purpose: str) -> None:
    """
    Check that an allocation of nbytes leaves the configured floor free.

    Args:
        nbytes: Size of the planned allocation in bytes
        purpose: Short description used in the error message

    Raises:
        ResourceLimitError: if the allocation does not fit
    """
    status = memory_status()
    needed_mb = nbytes / (1024 * 1024)
    if status['available_mb'] - needed_mb < Config.MEMORY_MIN_AVAILABLE_MB:
        logger.warning(
            f"Resource guard triggered: {purpose} needs {needed_mb:.1f}MB, "
            f"{status['available_mb']:.0f}MB available"
        )
        raise ResourceLimitError(
            f"{purpose} needs {needed_mb:.1f}MB but only "
            f"{status['available_mb']:.0f}MB is available "
            f"(floor {Config.MEMORY_MIN_AVAILABLE_MB}MB)"
        )
