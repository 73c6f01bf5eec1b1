import numpy as np
import pytest


def solve_stationary(transition, restart, damping):
    """Direct dense solve of (I - d T^T) s = (1 - d) r, renormalized."""
    n = len(restart)
    s = np.linalg.solve(np.eye(n) - damping * np.asarray(transition).T, (1 - damping) * np.asarray(restart))
    return s / s.sum()


def random_transition(rng, n):
    """Row-stochastic matrix from a random symmetric non-negative weight matrix, built by hand."""
    w = rng.random((n, n))
    w = (w + w.T) / 2
    w[rng.random((n, n)) < 0.3] = 0.0
    w = np.triu(w, 1)
    w = w + w.T
    t = np.zeros((n, n))
    for i in range(n):
        total = w[i].sum()
        if total > 0:
            t[i] = w[i] / total
        elif n == 1:
            t[i, i] = 1.0
        else:
            t[i] = 1.0 / (n - 1)
            t[i, i] = 0.0
    return w, t


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
