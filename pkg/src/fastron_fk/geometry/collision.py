"""Ground-truth collision checking of a capsule robot against a scene."""

from __future__ import annotations

import itertools

import numpy as np

from fastron_fk.geometry import _gjk
from fastron_fk.geometry.scene import Scene
from fastron_fk.geometry.shapes import Capsule
from fastron_fk.kinematics import RobotModel

COLLISION = 1
FREE = -1


def robot_capsules(robot: RobotModel, config) -> list[Capsule]:
    """Link capsules in the world frame."""
    q = np.ascontiguousarray(config, dtype=float)
    poses = np.empty((robot.dof, 4, 4))
    out = np.empty((len(robot.capsule_link), 2, 3))
    _gjk.capsule_world(
        robot.base_transform, robot.dh_table, robot.prismatic, robot.capsule_link, robot.capsule_local, q, poses, out
    )
    return [Capsule(p[0], p[1], r) for p, r in zip(out, robot.capsule_radius)]


class CollisionOracle:
    """Geometric collision checker for one robot in one scene.

    Calling the oracle with a configuration returns +1 (in collision) or -1.
    ``n_calls`` counts configurations checked; ``n_capped`` counts GJK runs
    that hit the iteration cap and were reported as intersecting.
    """

    def __init__(self, robot: RobotModel, scene: Scene):
        self.robot = robot
        self.scene = scene
        self.n_calls = 0
        self._capped = np.zeros(1, dtype=np.int64)
        r = robot
        self._robot_args = (r.base_transform, r.dh_table, r.prismatic, r.capsule_link, r.capsule_local, r.capsule_radius)
        self._scene_args = scene.packed()

    @property
    def n_capped(self) -> int:
        return int(self._capped[0])

    def __call__(self, config) -> int:
        self.n_calls += 1
        q = np.ascontiguousarray(config, dtype=float)
        hit = _gjk.config_in_collision(*self._robot_args, *self._scene_args, q, self._capped)
        return COLLISION if hit else FREE

    def labels(self, configs) -> np.ndarray:
        """Labels (+1/-1 ints) for an (N, D) array of configurations."""
        Q = np.ascontiguousarray(np.atleast_2d(configs), dtype=float)
        self.n_calls += len(Q)
        hit = _gjk.batch_in_collision(*self._robot_args, *self._scene_args, Q, self._capped)
        return np.where(hit, COLLISION, FREE)


def in_collision(robot: RobotModel, config, scene: Scene) -> int:
    """+1 if any link capsule touches any obstacle, else -1 (self-collision ignored)."""
    return CollisionOracle(robot, scene)(config)


def grid_axes(robot: RobotModel, resolution) -> list[np.ndarray]:
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (robot.dof,))
    return [np.linspace(lo, hi, n) for (lo, hi), n in zip(robot.joint_limits, res)]


def grid_configs(robot: RobotModel, resolution) -> np.ndarray:
    """All grid vertices over the joint limits, in C order, shape (prod(res), D)."""
    axes = grid_axes(robot, resolution)
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, robot.dof)


def grid_ground_truth(robot: RobotModel, scene: Scene, resolution) -> np.ndarray:
    """Collision labels on a regular grid over the joint limits.

    Returns an int array of shape ``resolution`` (one axis per joint). Only
    robots with at most 3 joints are supported.
    """
    if robot.dof > 3:
        raise NotImplementedError(f"grid ground truth supports at most 3 joints, robot has {robot.dof}")
    res = tuple(np.broadcast_to(np.asarray(resolution, dtype=int), (robot.dof,)))
    labels = CollisionOracle(robot, scene).labels(grid_configs(robot, res))
    return labels.reshape(res)
