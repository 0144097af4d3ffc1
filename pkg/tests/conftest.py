"""Prints the acceptance verdicts after the run, whatever the capture mode."""

ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)
