"""
Prometheus metrics collection for capacity runs.
Instruments live in the default registry; the CLI can dump them with
--metrics-file for a textfile collector.
"""

from prometheus_client import Counter, Histogram, REGISTRY, write_to_textfile
from functools import wraps
import time

# Capacity evaluation metrics
capacity_count = Counter(
    'ergocap_capacity_evaluations_total',
    'Total capacity evaluations',
    ['method']
)

capacity_duration = Histogram(
    'ergocap_capacity_duration_seconds',
    'Capacity evaluation latency',
    ['method']
)

# Quadrature metrics
quadrature_points = Histogram(
    'ergocap_quadrature_points',
    'Rule size at which the doubling driver converged',
    ['family'],
    buckets=(16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192)
)

# Monte Carlo metrics
mc_samples = Counter(
    'ergocap_mc_samples_total',
    'Total Monte Carlo channel realizations',
    ['ensemble']
)

mc_resamples = Counter(
    'ergocap_mc_resamples_total',
    'Degenerate draws that were redrawn',
    ['ensemble']
)

# Error metrics
error_count = Counter(
    'ergocap_errors_total',
    'Total errors',
    ['error_type']
)


def track_capacity(method: str):
    """
    Decorator counting and timing a capacity evaluation.

    Usage:
        @track_capacity("theorem1")
        def capacity_theorem1(...):
            ...
    """
    def decorator(f):
        @wraps(f)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                return f(*args, **kwargs)
            except Exception as e:
                error_count.labels(error_type=type(e).__name__).inc()
                raise
            finally:
                capacity_count.labels(method=method).inc()
                capacity_duration.labels(method=method).observe(time.perf_counter() - start_time)
        return wrapper
    return decorator


def track_quadrature(family: str, n_used: int):
    """
    Track the rule size a converged integration needed.

    Args:
        family: Rule family ('jacobi01', 'laguerre', 'laguerre_split')
        n_used: Number of nodes of the final rule
    """
    quadrature_points.labels(family=family).observe(n_used)


def track_mc_samples(ensemble: str, count: int, resampled: int = 0):
    """
    Track Monte Carlo realizations.

    Args:
        ensemble: 'haar', 'wishart' or 'gaussian'
        count: Number of realizations accumulated
        resampled: Number of degenerate draws replaced
    """
    mc_samples.labels(ensemble=ensemble).inc(count)
    if resampled:
        mc_resamples.labels(ensemble=ensemble).inc(resampled)


def track_error(error_type: str):
    """
    Track error occurrence.

    Args:
        error_type: Type of error (e.g., 'ConvergenceError', 'DomainError')
    """
    error_count.labels(error_type=error_type).inc()


def write_metrics(path: str):
    """
    Write the default registry in Prometheus text format.

    Args:
        path: Destination file
    """
    write_to_textfile(path, REGISTRY)
