import numpy as np
import pytest

from stokes_darcy.assembly import Discretization
from stokes_darcy.mms import ManufacturedCase


class ZeroCase(ManufacturedCase):
    """Identically zero solution; forcing and boundary data vanish."""

    name = "zero"

    def _z(self, x, y):
        return np.zeros(np.broadcast(x, y).shape)

    def velocity(self, x, y, t):
        return self._z(x, y), self._z(x, y)

    velocity_dt = velocity_laplacian = velocity

    def velocity_grad(self, x, y, t):
        z = self._z(x, y)
        return z, z, z, z

    def pressure(self, x, y, t):
        return self._z(x, y)

    head = head_dt = pressure

    def pressure_grad(self, x, y, t):
        return self._z(x, y), self._z(x, y)

    head_grad = pressure_grad

    def head_hessian(self, x, y, t):
        z = self._z(x, y)
        return z, z, z


@pytest.fixture
def zero_case():
    return ZeroCase()


@pytest.fixture(scope="session")
def disc4():
    return Discretization.build(4)


@pytest.fixture(scope="session")
def disc8():
    return Discretization.build(8)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines, key=lambda k: int(k[1:])):
        terminalreporter.write_line(lines[key])
