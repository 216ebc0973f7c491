import pytest

_RESULTS: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion identifier")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    number, title = mark.args
    detail = "; ".join(v for k, v in item.user_properties if k == "detail")
    _RESULTS.append((f"{number}", title, ("PASS" if report.passed else "FAIL") + (f"  [{detail}]" if detail else "")))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status in sorted(_RESULTS, key=lambda r: int(r[0])):
        terminalreporter.write_line(f"criterion {number} ({title}): {status}")


@pytest.fixture
def detail(record_property):
    """Attach a short measurement summary to the acceptance report line."""
    def _add(text: str):
        record_property("detail", text)
    return _add
