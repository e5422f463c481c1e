import math

import numpy as np
import pytest

from relhpe import EulerAngles, Rotation, SE3Pose, rotation_from_euler


def yaw_pose(deg, frame="world", t=(0.0, 0.0, 0.0)):
    return SE3Pose(rotation_from_euler(EulerAngles(deg, 0.0, 0.0)),
                   np.array(t, dtype=float), frame)


def random_rotation(rng) -> Rotation:
    # uniform on SO(3) via normalized Gaussian quaternion
    q = rng.normal(size=4)
    return Rotation(*q)


def random_pose(rng, frame="world", t_scale=500.0) -> SE3Pose:
    return SE3Pose(random_rotation(rng), rng.uniform(-t_scale, t_scale, 3), frame)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
