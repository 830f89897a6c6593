"""Shared pytest plumbing for the acceptance scoreboard.

Acceptance tests call :func:`report` with one line per criterion; the lines
are replayed as a dedicated section after the usual pytest summary so a
full run always ends with a compact PASS/FAIL scoreboard.
"""

_LINES: list[str] = []


def report(line: str) -> None:
    """Queue one line for the end-of-run acceptance summary."""
    _LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _LINES:
        return
    terminalreporter.section("acceptance summary")
    for line in _LINES:
        terminalreporter.write_line(line)
