from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): exit-gate acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, text = mark.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        verdict = "PASS" if report.passed else "FAIL"
        if report.when == "call" or number not in _results:
            _results[number] = (verdict, text)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        verdict, text = _results[number]
        terminalreporter.write_line(f"AC{number:<2} {verdict}  {text}")
