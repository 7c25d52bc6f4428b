from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
DEMO = DATA / "demo"

# filled by test_acceptance.record(); printed once at the end of the run
ACCEPTANCE = []


@pytest.fixture
def demo_dir():
    return DEMO


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
