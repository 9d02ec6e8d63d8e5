import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from thetaschlesinger.curve import BranchConfiguration
from thetaschlesinger.theta import Characteristic

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])


@pytest.fixture
def record_criterion(request):
    """Store and print one pass/fail line for an acceptance criterion."""
    def record(n: int, title: str, checks) -> bool:
        checks = list(checks)
        ok = bool(checks) and all(c.passed for c in checks)
        worst = sorted(checks, key=lambda c: c.defect / c.tol, reverse=True)[:3]
        detail = "; ".join(f"{c.name} {c.defect:.2e} (tol {c.tol:.0e})" for c in worst)
        line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {title} [{detail}]"
        request.config.stash[ACCEPTANCE][n] = line
        print(line)
        return ok
    return record


@pytest.fixture
def cfg1():
    return BranchConfiguration([0, 1, 2.1 + 0.1j, 3])


@pytest.fixture
def cfg2():
    return BranchConfiguration([0, 1, 2.1 + 0.1j, 3, 4.5, 5.2])


@pytest.fixture
def ch1():
    return Characteristic([0.3 + 0.05j], [0.1])


@pytest.fixture
def ch2():
    return Characteristic([0.3 + 0.05j, 0.2], [0.1, -0.15])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
