import numpy as np
import pytest

from seqca import _kernels
from seqca.tabulate import ContingencyTable


@pytest.fixture(params=sorted(_kernels.BACKENDS))
def backend(request):
    """Run a test once per available kernel backend."""
    prev = _kernels.use(request.param)
    yield request.param
    _kernels.use(prev)


def random_table(rng, max_rows=20, max_cols=10, min_rows=2, min_cols=2, high=20):
    """Random integer table with no all-zero row or column."""
    while True:
        n = int(rng.integers(min_rows, max_rows + 1))
        p = int(rng.integers(min_cols, max_cols + 1))
        k = rng.integers(0, high, size=(n, p)).astype(float)
        if np.all(k.sum(axis=0) > 0) and np.all(k.sum(axis=1) > 0):
            return ContingencyTable(
                tuple(f"r{i}" for i in range(n)), tuple(f"c{j}" for j in range(p)), k
            )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    key = mark.args[0]
    ok = rep.passed and _CRITERIA.get(key, (None, True))[1]
    if rep.when == "call" or not rep.passed:
        _CRITERIA[key] = (mark.args[1], ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        title, ok = _CRITERIA[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key:>2}: {title}")
