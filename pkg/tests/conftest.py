import numpy as np
import pytest

from plate_shape.convex import ConvexBody2D, disk, ellipse
from plate_shape.mesh import generate_mesh
from plate_shape.pipeline import ForwardConfig, forward
from plate_shape.plate import build_system, solve_eigenpairs


@pytest.fixture(scope="session")
def unit_disk():
    return ConvexBody2D(disk(1.0), "disk(1)")


@pytest.fixture(scope="session")
def ellipse_body():
    E, _ = ellipse(1.0, 1.2)
    return ConvexBody2D(E, "ellipse(1,1.2)")


@pytest.fixture(scope="session")
def disk_system(unit_disk):
    """Clamped unit disk at h = 0.05 with its three lowest eigenpairs."""
    system = build_system(generate_mesh(unit_disk, 0.05))
    return system, solve_eigenpairs(system, 3)


@pytest.fixture(scope="session")
def disk_forward(unit_disk):
    return forward(unit_disk, ForwardConfig(h=0.05, modes=3))


@pytest.fixture(scope="session")
def ellipse_forward(ellipse_body):
    return forward(ellipse_body, ForwardConfig(h=0.05, modes=3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
