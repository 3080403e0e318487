from __future__ import annotations

import pytest

# criterion number -> (title, detail lines, outcomes of its tests)
_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.fixture
def report(request):
    """Append a detail line to the acceptance summary of the test's criterion."""
    mark = request.node.get_closest_marker("criterion")
    entry = _CRITERIA.setdefault(mark.args[0], {"title": mark.args[1], "details": [], "outcomes": []})
    return entry["details"].append


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    mark = next((m for m in getattr(report, "_criterion", []) if m), None)
    if mark is None:
        return
    entry = _CRITERIA.setdefault(mark[0], {"title": mark[1], "details": [], "outcomes": []})
    entry["outcomes"].append((report.nodeid.split("::")[-1], report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    rep._criterion = [(mark.args[0], mark.args[1])] if mark else []


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        entry = _CRITERIA[num]
        outcomes = entry["outcomes"]
        ok = bool(outcomes) and all(o == "passed" for _, o in outcomes)
        tr.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {entry['title']}")
        for name, o in outcomes:
            if o != "passed":
                tr.write_line(f"    {name}: {o}")
        for line in entry["details"]:
            tr.write_line(f"    {line}")
