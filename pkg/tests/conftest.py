import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
_LINES = pytest.StashKey[list]()


def load_tables():
    with open(DATA / "tables.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def tables():
    return load_tables()


@pytest.fixture
def report_line(request):
    """Record a one-line criterion verdict; all of them are repeated in the summary."""
    lines = request.config.stash.setdefault(_LINES, [])

    def emit(text):
        print(text)
        lines.append(text)

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
