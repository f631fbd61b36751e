"""Shared pytest plumbing: acceptance criteria summary lines."""

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "::test_criterion_" in report.nodeid:
        _ACCEPTANCE[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE):
        name = nodeid.split("::")[-1].replace("test_", "", 1)
        outcome = _ACCEPTANCE[nodeid].upper()
        terminalreporter.write_line(f"{name}: {outcome}")
