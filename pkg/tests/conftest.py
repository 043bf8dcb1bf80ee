import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from billboard_regret.fixture import illustrative_instance  # noqa: E402

_CRITERIA: dict[str, tuple[str, str]] = {}


@pytest.fixture
def fixture_instance():
    return illustrative_instance()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number = marker.args[0]
    detail = dict(item.user_properties).get("detail", "")
    if report.failed:
        _CRITERIA[number] = ("FAIL", detail or str(report.longrepr).splitlines()[-1][:120])
    elif report.when == "call":
        _CRITERIA[number] = ("PASS", detail)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}".rstrip())
