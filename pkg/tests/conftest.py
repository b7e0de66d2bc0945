"""Collects acceptance outcomes and prints one line per criterion."""

from __future__ import annotations

# criterion number -> (title, list of outcomes)
_criteria: dict[int, tuple[str, list[bool]]] = {}
_node_criterion: dict[str, int] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is None:
            continue
        number, title = marker.args
        _node_criterion[item.nodeid] = number
        _criteria.setdefault(number, (title, []))


def pytest_runtest_logreport(report):
    number = _node_criterion.get(report.nodeid)
    if number is None:
        return
    if report.when == "call" or report.failed:
        _criteria[number][1].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, outcomes = _criteria[number]
        if not outcomes:
            status = "SKIP"
        else:
            status = "PASS" if all(outcomes) else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")

