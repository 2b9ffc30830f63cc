import numpy as np
import pytest

from lblepski.manifold_lab import eval_test_function, sample_uniform_sphere

ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Collects one pass/fail line per acceptance criterion."""
    def _record(criterion, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_bench():
    est = sample_uniform_sphere(4000, 11, (0, 0))
    val = sample_uniform_sphere(150, 11, (0, 1))
    est.f = eval_test_function(est)
    val.f = eval_test_function(val)
    return est, val


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
