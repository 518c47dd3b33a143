import pytest

# One line per acceptance criterion, filled by tests/test_acceptance.py.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance_report():
    def record(criterion: int, passed: bool, detail: str, runtime: float):
        line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  ({runtime:.2f} s)  {detail}"
        ACCEPTANCE_LINES[criterion] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
