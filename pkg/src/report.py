"""
Result rows and their CSV / JSON renderings.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import IO, Iterable, List, Optional

from channel import CapacityEstimate, Method

FIELDS = ["method", "m", "mt", "mr", "snr_db", "scaling", "units",
          "capacity", "err", "samples", "seed", "N_used"]

UNITS = ("nats", "bits")


@dataclass
class OutputRow:
    """One (method, parameter point) result."""
    method: str
    m: Optional[int]
    mt: int
    mr: int
    snr_db: float
    scaling: str
    units: str
    capacity: float
    err: float
    samples: Optional[int] = None
    seed: Optional[int] = None
    N_used: Optional[int] = None

    def __post_init__(self):
        if self.units not in UNITS:
            raise ValueError(f"units must be one of {UNITS}, got {self.units!r}")
        if not self.capacity >= 0:
            raise ValueError(f"capacity must be >= 0, got {self.capacity!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def row_from_estimate(estimate: CapacityEstimate, m: Optional[int], mt: int, mr: int,
                      snr_db: float, scaling: str, units: str = "nats") -> OutputRow:
    """
    Build a row, converting to bits when asked. Relative error estimates
    are unit-free and pass through unchanged.
    """
    scale = 1.0 / math.log(2) if units == "bits" else 1.0
    meta = estimate.meta
    err = estimate.err if meta.get("err_kind") == "relative" else estimate.err * scale
    is_mc = estimate.method in (Method.MC, Method.MC_WISHART)
    return OutputRow(
        method=estimate.method.value,
        m=m,
        mt=mt,
        mr=mr,
        snr_db=snr_db,
        scaling=scaling,
        units=units,
        capacity=estimate.nats * scale,
        err=err,
        samples=meta.get("samples") if is_mc else None,
        seed=meta.get("seed") if is_mc else None,
        N_used=meta.get("N_used") or None,
    )


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: Iterable[OutputRow], stream: IO[str]) -> None:
    """Header plus one line per row, LF line endings, empty cells for N/A."""
    writer = csv.DictWriter(stream, fieldnames=FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_value(v) for k, v in row.to_dict().items()})


def write_json(rows: Iterable[OutputRow], stream: IO[str]) -> None:
    """Array of row objects with the CSV field names."""
    json.dump([row.to_dict() for row in rows], stream, indent=2)
    stream.write("\n")


def render(rows: List[OutputRow], fmt: str, stream: IO[str]) -> None:
    if fmt == "json":
        write_json(rows, stream)
    elif fmt == "csv":
        write_csv(rows, stream)
    else:
        raise ValueError(f"unknown output format {fmt!r}")
