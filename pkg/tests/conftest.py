import numpy as np
import pytest

from fastmm.catalog import builtin


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def strassen():
    return builtin("strassen-p2")


@pytest.fixture(scope="session")
def laderman():
    return builtin("laderman-p3")


@pytest.fixture(scope="session")
def classical2():
    return builtin("classical-p2")


def int_matrix(rng, n, lo=-8, hi=8):
    return rng.integers(lo, hi + 1, (n, n)).astype(np.float64)


ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        ACCEPTANCE[number] = ("PASS" if report.passed else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
