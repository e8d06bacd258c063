import numpy as np
import pytest

from dca_iqp import IqProblem, Polyhedron, SymMatrix


@pytest.fixture
def toy1d():
    """min x^2 - 4x over x >= 0; unique minimizer x = 2."""
    Q = SymMatrix(np.array([[2.0]]))
    C = Polyhedron(np.array([[1.0]]), np.array([0.0]))
    return IqProblem(Q, np.array([-4.0]), C)


@pytest.fixture
def three_kkt():
    """min -x^2 + 2x over 0 <= x <= 3.

    Concave objective; KKT points are x = 0 (f = 0), x = 1 (f = 1) and
    x = 3 (f = -3), the global minimizer.
    """
    Q = SymMatrix(np.array([[-2.0]]))
    C = Polyhedron(np.array([[1.0], [-1.0]]), np.array([0.0, -3.0]))
    return IqProblem(Q, np.array([2.0]), C)


@pytest.fixture
def box2d():
    """Unit square [0, 1]^2."""
    A = np.vstack([np.eye(2), -np.eye(2)])
    b = np.array([0.0, 0.0, -1.0, -1.0])
    return Polyhedron(A, b)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance check, after the regular output."""
    verdicts = {}
    for outcome, label in (
        ("failed", "FAIL"),
        ("error", "FAIL"),
        ("passed", "PASS"),
        ("skipped", "SKIP"),
    ):
        for report in terminalreporter.stats.get(outcome, ()):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::" not in nodeid:
                continue
            verdicts.setdefault(nodeid.split("::")[-1], label)
    if not verdicts:
        return
    terminalreporter.section("acceptance")
    for name in sorted(verdicts):
        terminalreporter.write_line(f"{name}: {verdicts[name]}")
