"""Shared pytest plumbing for the suite.

The acceptance gate records one PASS/FAIL verdict line per release
criterion; emit them in the terminal summary so they survive output
capturing in a plain ``pytest -v`` run.
"""

ACCEPTANCE_VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)
