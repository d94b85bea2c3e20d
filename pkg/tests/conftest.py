import contextlib

import numpy as np
import pytest

_RESULTS = {}


class _Criterion:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.failures = []
        self.notes = []

    def check(self, ok, message):
        if not ok:
            self.failures.append(message)

    def note(self, message):
        self.notes.append(message)


@pytest.fixture
def acceptance():
    """Record a pass/fail line for an acceptance criterion, then assert on it."""

    @contextlib.contextmanager
    def run(number, title):
        crit = _Criterion(number, title)
        try:
            yield crit
        except Exception as exc:
            crit.failures.append(f"{type(exc).__name__}: {exc}")
            raise
        finally:
            ok = not crit.failures
            detail = "; ".join(crit.failures if not ok else crit.notes)
            _RESULTS[number] = (ok, title, detail)
            print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {title} | {detail}")
        assert not crit.failures, "; ".join(crit.failures)

    return run


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_RESULTS):
        ok, title, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
