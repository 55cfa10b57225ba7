import contextlib
import time

import numpy as np
import pytest

from lrstv.fixtures import synthetic_cube

_RESULTS = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture(scope="session")
def standard_cube():
    return synthetic_cube(seed=0)


@pytest.fixture
def criterion(request):
    """Run a block as a numbered acceptance criterion and report PASS/FAIL.

    The block fails if it raises or overruns ``limit`` seconds. One line per
    criterion is printed immediately and repeated in the terminal summary.
    """
    results = request.config.stash.setdefault(_RESULTS, [])

    @contextlib.contextmanager
    def run(number, title, limit=None):
        start = time.perf_counter()
        status = "FAIL"
        try:
            yield
            elapsed = time.perf_counter() - start
            if limit is not None:
                assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"
            status = "PASS"
        finally:
            elapsed = time.perf_counter() - start
            budget = f", limit {limit:g} s" if limit is not None else ""
            line = f"{status} [{number}] {title} ({elapsed:.2f} s{budget})"
            results.append(line)
            print(line, flush=True)

    return run


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_RESULTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
