import pytest
from hypothesis import settings

settings.register_profile("lab", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("lab")

ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_line():
    def record(k, passed, detail):
        ACCEPTANCE_LINES[k] = f"C{k:<2d} {'PASS' if passed else 'FAIL'}  {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
