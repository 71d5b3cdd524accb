from __future__ import annotations

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    """Collects one summary line per acceptance criterion."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
