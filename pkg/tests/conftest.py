import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# (number, title) -> list of per-test outcomes
_CRITERIA: dict[tuple[int, str], list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    key = (int(marker.args[0]), str(marker.args[1]))
    if report.when == "call" or report.failed:
        _CRITERIA.setdefault(key, []).append(report.passed and not report.skipped)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), outcomes in sorted(_CRITERIA.items()):
        verdict = "PASS" if outcomes and all(outcomes) else "FAIL"
        passed = sum(outcomes)
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {title}  ({passed}/{len(outcomes)} checks)")
