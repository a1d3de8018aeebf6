"""Shared test plumbing: the suite clock and the acceptance summary block."""

import time

SUITE_T0 = time.perf_counter()

# one verdict line per acceptance criterion, appended by test_acceptance.py
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
    total = time.perf_counter() - SUITE_T0
    terminalreporter.write_line(f"suite wall clock: {total:.1f}s (budget 60s)")
