import pytest

# criterion number -> (title, passed, seconds); filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, float]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        title, ok, secs = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title} ({secs:.2f}s)")
