import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fastron_fk.kinematics import DHParams, RobotModel, load_robot, straight_link_capsules  # noqa: E402


def planar_arm(lengths=(1.0, 1.0), radius=0.05):
    links = [DHParams(a=a) for a in lengths]
    return RobotModel(
        links,
        [(-np.pi, np.pi)] * len(links),
        link_capsules=straight_link_capsules(links, radius),
        name="planar",
    )


@pytest.fixture
def planar2():
    return planar_arm()


@pytest.fixture(scope="session")
def arm3():
    return load_robot("arm3")


@pytest.fixture(scope="session")
def arm7():
    return load_robot("arm7")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
