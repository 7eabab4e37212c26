from __future__ import annotations

import importlib.resources
from pathlib import Path

import pytest

FIXTURES = Path(str(importlib.resources.files("tgm") / "fixtures"))

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): test belongs to an acceptance criterion")


def pytest_itemcollected(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        number, title = mark.args
        _CRITERIA.setdefault(number, {"title": title, "outcomes": []})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA[mark.args[0]]["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        outcomes = entry["outcomes"]
        if not outcomes:
            status = "SKIP"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"{status} criterion {number}: {entry['title']}")


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES
