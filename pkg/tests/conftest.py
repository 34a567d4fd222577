import numpy as np
import pytest

from normsmooth import prox, smooth
from normsmooth.normal import ProblemHandle
from normsmooth.probio import synth_problem


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", []):
                if name == "acceptance":
                    lines.append((value, "PASS" if rep.passed else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for value, outcome in sorted(lines, key=lambda t: int(t[0].split(".", 1)[0])):
            terminalreporter.write_line(f"[{outcome}] {value}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def logistic_problem():
    ds = synth_problem("logistic", 200, 50, 1.0, seed=0)
    return ProblemHandle(smooth.logistic(ds.A, ds.b), prox.l1(0.002), 10.0)


@pytest.fixture(scope="session")
def group_problem():
    N, n = 200, 64
    ds = synth_problem("sigmoid_ls", N, n, 1.0, seed=0)
    obj = smooth.sigmoid_ls(ds.A, ds.b)
    groups = prox.random_groups(n, 16, np.random.Generator(np.random.PCG64(0)))
    return ProblemHandle(obj, prox.group_l2(2.0 / N, groups), 10.0 / obj.lipschitz_bound())


@pytest.fixture
def scalar_problem():
    """f = (x - 3)^2 / 2, phi = |x|, lam = 1; unique minimizer x = 2."""
    return ProblemHandle(smooth.quadratic(center=np.array([3.0])), prox.l1(1.0), 1.0)
