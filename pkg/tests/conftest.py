import os
import time

import pytest
from hypothesis import settings

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def suite_reports():
    """The full claim suite, run once per session (the A_12 claims take minutes)."""
    from symgraph.claims import run_suite

    t0 = time.perf_counter()
    reports, code = run_suite()
    return {"reports": {r.label: r for r in reports}, "exit_code": code,
            "seconds": time.perf_counter() - t0}


@pytest.fixture
def acceptance_line():
    def record(number, ok, text):
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}: {text}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
