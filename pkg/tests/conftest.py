"""Shared scenarios and cached reference solves."""
import numpy as np
import pytest

from dirac_utm.model import Geometry, GeometryKind
from dirac_utm.profiles import GaussianWindow as G
from dirac_utm.profiles import ZeroProfile
from dirac_utm.reference import solve_reference
from dirac_utm.scenario import Scenario

DX = 2.0 ** -10
HALF_TIMES = (0.25, 0.5, 1.0)
FINITE_TIMES = tuple(0.25 + 0.125 * j for j in range(11))


def halfline_data():
    return (G(-1.3, 0.3, amplitude=1.0), G(-1.5, 0.3, amplitude=0.7),
            G(1.3, 0.3, amplitude=-0.6), G(1.2, 0.25, amplitude=0.9))


def finite_data():
    init = (G(-1.0, 0.25, amplitude=1.0), G(-0.9, 0.2, amplitude=0.6),
            G(1.1, 0.25, amplitude=-0.7), G(0.9, 0.2, amplitude=0.8))
    bnd = (G(0.7, 0.12, amplitude=0.5), ZeroProfile(), ZeroProfile(), G(0.8, 0.12, amplitude=-0.4))
    return init, bnd


@pytest.fixture(scope="session")
def halfline_scenario():
    return Scenario(Geometry(GeometryKind.TWO_HALF_LINES, 1.0), 1.0, 2.0, halfline_data())


@pytest.fixture(scope="session")
def halfline_reference(halfline_scenario):
    return solve_reference(halfline_scenario, DX, snapshot_times=HALF_TIMES)


@pytest.fixture(scope="session")
def finite_scenario():
    init, bnd = finite_data()
    return Scenario(Geometry(GeometryKind.TWO_FINITE_INTERVALS, 1.5, 2.0), 1.0, 2.0, init, bnd)


@pytest.fixture(scope="session")
def finite_reference(finite_scenario):
    return solve_reference(finite_scenario, DX, snapshot_times=FINITE_TIMES)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line: ``verdict(n, ok, detail)``."""

    def record(number, ok, detail):
        line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
