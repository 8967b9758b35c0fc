"""Shared fixtures: deterministic RNG streams and the acceptance report sink."""

from pathlib import Path

import numpy as np
import pytest

REPORT_PATH = Path(__file__).resolve().parent.parent / "acceptance_report.txt"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_lines():
    """Collects one line per acceptance criterion; written out at session end."""
    lines = []
    yield lines
    if lines:
        lines.sort()
        REPORT_PATH.write_text("\n".join(lines) + "\n")
