import numpy as np
import pytest

from ptcavity.basis import BasisSpec, enumerate_basis
from ptcavity.coupling import assemble
from ptcavity import profiles


@pytest.fixture(scope="session")
def disk_basis():
    return enumerate_basis(BasisSpec(k_window=(0.0, 3.2), order_max=8))


@pytest.fixture(scope="session")
def linear_system(disk_basis):
    return assemble(disk_basis, profiles.linear_gradient())


@pytest.fixture(scope="session")
def wheel_system(disk_basis):
    return assemble(disk_basis, profiles.pt_wheel())


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
