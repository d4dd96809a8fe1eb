from functools import lru_cache

import pytest

from spvertex.transfer import LeadingBranch

ACCEPTANCE_LINES = []


@lru_cache(maxsize=None)
def branch(n, L):
    """Ground-state branch vectors are expensive at L=6; compute each once per session."""
    return LeadingBranch(n, L)


@pytest.fixture
def report():
    def _record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
