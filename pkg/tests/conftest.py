"""Shared test helpers: acceptance criterion reporting.

Acceptance tests register one line per criterion; the lines are echoed in
the terminal summary so the pass/fail status of every criterion is visible
regardless of output capturing.
"""

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> str:
    line = f"ACCEPTANCE CRITERION {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
