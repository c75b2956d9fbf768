from fastron_fk.geometry.collision import (
    COLLISION,
    FREE,
    CollisionOracle,
    grid_axes,
    grid_configs,
    grid_ground_truth,
    in_collision,
    robot_capsules,
)
from fastron_fk.geometry.scene import MotionScript, RandomObstacles, Scene, SceneSpec, load_scene, scene_from_dict
from fastron_fk.geometry.shapes import Box, Capsule, Hull, Sphere, ellipsoid_hull, gjk_intersect

__all__ = [
    "Box",
    "COLLISION",
    "Capsule",
    "CollisionOracle",
    "FREE",
    "Hull",
    "MotionScript",
    "RandomObstacles",
    "Scene",
    "SceneSpec",
    "Sphere",
    "ellipsoid_hull",
    "gjk_intersect",
    "grid_axes",
    "grid_configs",
    "grid_ground_truth",
    "in_collision",
    "load_scene",
    "robot_capsules",
    "scene_from_dict",
]
