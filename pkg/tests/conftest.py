import numpy as np
import pytest

from gridtopo import fixture_path, read_measurements_csv

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = _criteria.get(report.nodeid)
    if marker is not None:
        marker["outcome"] = "PASS" if report.passed else "FAIL"


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criteria[item.nodeid] = {"number": m.args[0], "title": m.args[1], "outcome": "NOT RUN"}


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for rec in sorted(_criteria.values(), key=lambda r: r["number"]):
        terminalreporter.write_line(f"criterion {rec['number']}: {rec['outcome']:7s} {rec['title']}")


@pytest.fixture(scope="session")
def table1():
    return read_measurements_csv(fixture_path("ieee4_tab1.csv"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
