import contextlib
import time

import pytest

_KEY = "_acceptance_lines"


class Criterion:
    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.checks = []

    def check(self, ok, detail):
        self.checks.append((bool(ok), detail))
        return ok


@pytest.fixture
def criterion(request):
    lines = request.config.__dict__.setdefault(_KEY, [])

    @contextlib.contextmanager
    def run(number, title, budget):
        c = Criterion(number, title, budget)
        t0 = time.perf_counter()
        error = None
        try:
            yield c
        except Exception as exc:  # recorded, then re-raised below
            error = exc
        elapsed = time.perf_counter() - t0
        if error is not None:
            c.check(False, f"error: {type(error).__name__}: {error}")
        c.check(elapsed < budget, f"runtime {elapsed:.1f} s (budget {budget} s)")
        ok = all(k for k, _ in c.checks)
        detail = "; ".join(("" if k else "FAILED ") + d for k, d in c.checks)
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        lines.append(line)
        print(line)
        if error is not None:
            raise error
        assert ok, line

    return run


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get(_KEY)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
