"""Collects acceptance-criterion outcomes and prints one line per criterion."""
from collections import defaultdict

import pytest

_outcomes = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    item.user_properties.append(("criterion", marker.args[0]))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes[crit].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_outcomes):
        results = _outcomes[crit]
        if "failed" in results:
            verdict = "FAIL"
        elif all(r == "skipped" for r in results):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {crit:>2}: {verdict}")
