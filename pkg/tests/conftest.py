import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance():
    """Record one acceptance result: ``acceptance(n, ok, detail)``."""
    def record(n: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[n] = (ok, detail)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_sessionfinish(session):
    from vccts import clear_caches

    clear_caches()
