"""Echo the acceptance criterion lines at the end of a pytest run."""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split('criterion')[1].split(':')[0])):
            terminalreporter.write_line(line)
