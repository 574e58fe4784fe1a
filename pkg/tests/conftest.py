import time

import numpy as np
import pytest

from fracalign.hydro import SolverConfig, run
from fracalign.spectral import RealField, make_grid

ACCEPTANCE_LINES: list[str] = []
# Wall time of the session-scoped runs, keyed by fixture name.
RUN_SECONDS: dict[str, float] = {}


@pytest.fixture(scope="session")
def acceptance_report():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def paper_run():
    """Paper-like preset at n=512 to t=20, with snapshots every 100 steps."""
    states = []
    start = time.perf_counter()
    final, records = run(SolverConfig(n=512, output_stride=20, snapshot_stride=100),
                         on_snapshot=states.append)
    RUN_SECONDS["paper_run"] = time.perf_counter() - start
    return final, records, states


@pytest.fixture(scope="session")
def paper_run_fine():
    start = time.perf_counter()
    _, records = run(SolverConfig(n=1024, output_stride=20))
    RUN_SECONDS["paper_run_fine"] = time.perf_counter() - start
    return records


def band_limited(grid, coeffs, rng=None):
    """Real field ``sum_k a_k cos(kx) + b_k sin(kx)`` from ``[(k, a, b), ...]``."""
    x = grid.nodes
    vals = np.zeros_like(x)
    for k, a, b in coeffs:
        vals += a * np.cos(k * x) + b * np.sin(k * x)
    return RealField(vals, grid)


@pytest.fixture
def grid256():
    return make_grid(256)
