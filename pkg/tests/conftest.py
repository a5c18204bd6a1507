import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# filled by test_acceptance, printed once at the end of the run
ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[num])
