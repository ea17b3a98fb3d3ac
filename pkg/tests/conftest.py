import pytest

from steinercodes.cli import run_demo
from steinercodes.designs import construct_boolean_sqs, construct_sts, double_sqs
from steinercodes.exactcover import SolverBudget, construct_cyclic_steiner

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fano():
    return construct_sts(7)


@pytest.fixture(scope="session")
def sqs8():
    return construct_boolean_sqs(3)


@pytest.fixture(scope="session")
def sqs16(sqs8):
    return double_sqs(sqs8)


@pytest.fixture(scope="session")
def sqs26():
    return construct_cyclic_steiner(3, 26, 4, SolverBudget(time_limit=600))


@pytest.fixture(scope="session")
def demo26():
    """Cyclic SQS(26) with a verified two-fold ordering and its audit (seed 42)."""
    return run_demo(26, seed=42, time_limit=300, log=lambda *_: None)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion; printed in the terminal summary."""

    def record(number: int, passed: bool, detail: str):
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
