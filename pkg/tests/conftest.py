from __future__ import annotations

from typing import List

# filled by test_acceptance.report(); shown after the run so capture cannot hide it
CRITERION_LINES: List[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
