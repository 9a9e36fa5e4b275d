import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA_DIR = Path(os.environ.get("MOCLUST_DATA", Path(__file__).resolve().parents[1] / "data"))


def data_file(name):
    """Path of a benchmark CSV in the data directory, or None if absent."""
    p = DATA_DIR / f"{name}.csv"
    return p if p.exists() else None


def random_partition(rng, n, k_max=None):
    k_max = k_max or n
    return rng.integers(0, rng.integers(1, k_max + 1), size=n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> (verdict, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        verdict, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {verdict} - {detail}")
