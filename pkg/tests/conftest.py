import numpy as np
import pytest

from emframes.core import UNIT
from emframes.fields import ChargeCurrent, FieldJet, maxwell_constraint_system
from emframes.kinematics import Orthogonal3

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_orthogonal(rng, proper=False):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if proper and np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return Orthogonal3(q)


def random_velocity(rng, vmax=0.99, c=1.0):
    d = rng.normal(size=3)
    return d / np.linalg.norm(d) * rng.uniform(0.0, vmax) * c


def random_complex_velocity(rng, scale=0.5):
    return scale * (rng.normal(size=3) + 1j * rng.normal(size=3))


def maxwell_jet(rng, const=UNIT, point=None, sources=True):
    """Random jet obeying the 8 Maxwell conditions at ``point``."""
    cc = (ChargeCurrent(rng.normal(), rng.normal(size=3)) if sources
          else ChargeCurrent(0.0, np.zeros(3)))
    M, r = maxwell_constraint_system(cc, const)
    z0 = np.linalg.lstsq(M, r, rcond=None)[0]
    _, _, Vh = np.linalg.svd(M)
    z = z0 + Vh[8:].conj().T @ rng.normal(size=22)
    p = np.zeros(4) if point is None else point
    base = FieldJet(p, np.zeros(3), np.zeros((3, 4)), np.zeros(3), np.zeros((3, 4)),
                    cc.rho, None, cc.J, None)
    return base.with_coefficients(z)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
