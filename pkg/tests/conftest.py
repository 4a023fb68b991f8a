from helpers import ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    # one pass/fail line per acceptance criterion, after the run
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
