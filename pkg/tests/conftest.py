import pytest

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    detail = dict(report.user_properties).get("detail", "")
    _criteria.append((mark.args[0], mark.args[1], report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_criteria):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number} {status}: {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
