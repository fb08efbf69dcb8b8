import sys

import pytest

from ssgap import hamflow
from ssgap.hamflow import System


@pytest.fixture(scope="session")
def piii_trajectories():
    """The 100 random P_III trajectories on t in [1, 3] (seed 0)."""
    trajs, _ = hamflow.sample_piii_trajectories(0, 100)
    return trajs


@pytest.fixture(scope="session")
def piii_prime_trajectories():
    trajs, _ = hamflow.sample_piii_trajectories(3, 4, t_span=(1.0, 2.0), system=System.PIII_PRIME)
    return trajs


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.REPORT):
        terminalreporter.write_line(mod.REPORT[n])
