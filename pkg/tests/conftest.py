import pytest

_RESULTS: dict[int, dict] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, text = mark.args
            entry = _RESULTS.setdefault(number, {"text": text, "tests": {}})
            entry["tests"][item.nodeid] = None


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    tests = _RESULTS[mark.args[0]]["tests"]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        tests[item.nodeid] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        states = list(entry["tests"].values())
        if any(s is None for s in states):
            verdict = "NOT RUN"
        elif all(states):
            verdict = "PASS"
        else:
            verdict = "FAIL"
        passed = sum(1 for s in states if s)
        terminalreporter.write_line(
            f"criterion {number:2d}: {verdict:7s} ({passed}/{len(states)} checks)  {entry['text']}"
        )
