"""Shared pytest plumbing for the suite.

Acceptance tests register one verdict line per criterion; the hook below
replays them after the normal summary so a plain `pytest -v` shows every
verdict even though per-test stdout is captured.
"""

CRITERION_LINES: list[str] = []


def record_criterion(line: str) -> None:
    CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in CRITERION_LINES:
        terminalreporter.write_line(line)
