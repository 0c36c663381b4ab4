from __future__ import annotations

import pytest

# criterion number -> (title, [outcomes])
_CRITERIA: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _CRITERIA.setdefault(number, (title, []))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number = mark.args[0]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA[number][1].append("skip" if report.skipped else "pass" if report.passed else "fail")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcomes = _CRITERIA[number]
        if not outcomes:
            status = "NOT RUN"
        elif "fail" in outcomes:
            status = "FAIL"
        elif all(o == "skip" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        tr.write_line(f"criterion {number:>2} {status:<7} {title}")
