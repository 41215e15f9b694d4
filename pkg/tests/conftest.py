"""Prints one line per acceptance criterion at the end of the run."""

_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _criteria[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, rep in _criteria.items():
        status = "PASS" if rep.passed else "FAIL"
        detail = "; ".join(f"{k}={v}" for k, v in rep.user_properties)
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{detail}]" if detail else ""))
