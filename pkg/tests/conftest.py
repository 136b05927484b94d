import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_LINES = []


class _Criterion:
    """Times one acceptance criterion and records a PASS/FAIL line."""

    def __init__(self, number, title, limit):
        self.number, self.title, self.limit = number, title, limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        dt = time.perf_counter() - self.t0
        slow = dt >= self.limit
        ok = exc_type is None and not slow
        why = "" if ok else (" (over the %gs limit)" % self.limit if exc_type is None else " (%s)" % exc_type.__name__)
        line = "criterion %2d %-48s %s  %.1fs / %gs%s" % (self.number, self.title, "PASS" if ok else "FAIL",
                                                         dt, self.limit, why)
        _LINES.append((self.number, line))
        print(line)
        if exc_type is None and slow:
            raise AssertionError("criterion %d took %.1fs, limit %gs" % (self.number, dt, self.limit))
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
