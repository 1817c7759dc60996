"""Shared fixtures; puts src/ on the import path."""
import logging
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from linalg import RngStream  # noqa: E402

TIGHT_RTOL = 1e-12


@pytest.fixture(autouse=True)
def restore_root_logger():
    """cli.run reconfigures the root logger; undo it after every test."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def rng():
    return RngStream(seed=42, stream_id=0)


@pytest.fixture
def tight_rtol():
    return TIGHT_RTOL
