"""Standard Denavit-Hartenberg kinematics for serial manipulators.

Transforms are plain 4x4 homogeneous ``numpy`` arrays. Configurations are
1-D float arrays of joint values (radians for revolute joints, length units
for prismatic ones). Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from fastron_fk import _jit

REVOLUTE = "revolute"
PRISMATIC = "prismatic"


@dataclass(frozen=True)
class DHParams:
    """One link of a standard D-H chain.

    The slot selected by ``joint_kind`` (theta for revolute, d for prismatic)
    holds a constant offset that is added to the joint value.
    """

    theta_offset: float = 0.0
    d: float = 0.0
    a: float = 0.0
    alpha: float = 0.0
    joint_kind: str = REVOLUTE

    def __post_init__(self):
        if self.joint_kind not in (REVOLUTE, PRISMATIC):
            raise ValueError(f"unknown joint kind {self.joint_kind!r}")
        for name in ("theta_offset", "d", "a", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"D-H parameter {name} must be finite")
        for name in ("theta_offset", "alpha"):
            v = getattr(self, name)
            if not (-math.pi - 1e-12 < v <= math.pi + 1e-12):
                raise ValueError(f"{name}={v} outside (-pi, pi]")


@dataclass(frozen=True)
class ControlPointSpec:
    joint_index: int
    transform: np.ndarray = field(default_factory=lambda: np.eye(4))


@dataclass(frozen=True)
class LinkCapsule:
    """Capsule rigidly attached to a link, endpoints in that link's joint frame."""

    p0: np.ndarray
    p1: np.ndarray
    radius: float


def dh_transform(params: DHParams, joint_value: float) -> np.ndarray:
    """Pose of joint i in the frame of joint i-1 for the given joint value."""
    if not math.isfinite(joint_value):
        raise ValueError("joint value must be finite")
    theta, d = params.theta_offset, params.d
    if params.joint_kind == REVOLUTE:
        theta = theta + joint_value
    else:
        d = d + joint_value
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(params.alpha), math.sin(params.alpha)
    return np.array(
        [
            [ct, -ca * st, sa * st, params.a * ct],
            [st, ca * ct, -sa * ct, params.a * st],
            [0.0, sa, ca, d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def make_transform(rotation=None, translation=None) -> np.ndarray:
    T = np.eye(4)
    if rotation is not None:
        T[:3, :3] = np.asarray(rotation, dtype=float)
    if translation is not None:
        T[:3, 3] = np.asarray(translation, dtype=float)
    return T


def rpy_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Rotation Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


class RobotModel:
    """A serial chain with joint limits, control points and link capsules.

    ``control_points=None`` auto-places one control point at every joint-frame
    origin, except revolute joints with ``d == a == 0`` whose origin coincides
    with the previous one. ``link_capsules`` may contain ``None`` for links
    without collision geometry.
    """

    def __init__(
        self,
        links,
        joint_limits,
        base_transform=None,
        control_points=None,
        link_capsules=None,
        name: str = "robot",
    ):
        self.name = name
        self.links = tuple(links)
        if not self.links:
            raise ValueError("robot needs at least one link")
        D = len(self.links)
        limits = np.asarray(joint_limits, dtype=float).reshape(D, 2)
        if not np.all(limits[:, 0] < limits[:, 1]):
            raise ValueError("joint limits must satisfy lo < hi")
        self.joint_limits = limits
        self.base_transform = np.eye(4) if base_transform is None else np.asarray(base_transform, dtype=float)
        if control_points is None:
            control_points = default_control_points(self.links)
        self.control_points = tuple(control_points)
        if not self.control_points:
            raise ValueError("robot needs at least one control point")
        for cp in self.control_points:
            if not 0 <= cp.joint_index < D:
                raise ValueError(f"control point joint index {cp.joint_index} out of range")
        if link_capsules is None:
            link_capsules = [None] * D
        if len(link_capsules) != D:
            raise ValueError("need one capsule entry (or None) per link")
        self.link_capsules = tuple(link_capsules)

        # flat arrays consumed by the compiled kernels
        self.dh_table = np.array([[p.theta_offset, p.d, p.a, p.alpha] for p in self.links])
        self.prismatic = np.array([p.joint_kind == PRISMATIC for p in self.links])
        self.cp_joint = np.array([cp.joint_index for cp in self.control_points], dtype=np.int64)
        self.cp_transform = np.stack([np.asarray(cp.transform, dtype=float) for cp in self.control_points])
        caps = [(i, c) for i, c in enumerate(self.link_capsules) if c is not None]
        self.capsule_link = np.array([i for i, _ in caps], dtype=np.int64)
        self.capsule_local = np.array([[c.p0, c.p1] for _, c in caps], dtype=float).reshape(-1, 2, 3)
        self.capsule_radius = np.array([c.radius for _, c in caps], dtype=float)

    @property
    def dof(self) -> int:
        return len(self.links)

    @property
    def n_control_points(self) -> int:
        return len(self.control_points)

    @property
    def lower(self) -> np.ndarray:
        return self.joint_limits[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.joint_limits[:, 1]

    @property
    def joint_range(self) -> np.ndarray:
        return self.joint_limits[:, 1] - self.joint_limits[:, 0]

    @property
    def reach(self) -> float:
        """Upper bound on the distance from the base to any joint origin."""
        return float(sum(math.hypot(p.a, p.d) for p in self.links))

    def normalize(self, q) -> np.ndarray:
        """Min-max scale joint values to [0, 1] using the joint limits."""
        return (np.asarray(q, dtype=float) - self.lower) / self.joint_range

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` configurations drawn uniformly within the joint limits."""
        return self.lower + rng.random((n, self.dof)) * self.joint_range

    def clamp(self, q) -> np.ndarray:
        return np.clip(q, self.lower, self.upper)

    def __repr__(self):
        return f"RobotModel({self.name!r}, dof={self.dof}, control_points={self.n_control_points})"


def default_control_points(links) -> list[ControlPointSpec]:
    return [
        ControlPointSpec(i)
        for i, p in enumerate(links)
        if not (p.joint_kind == REVOLUTE and p.d == 0.0 and p.a == 0.0)
    ]


def straight_link_capsules(links, radius: float) -> list[LinkCapsule | None]:
    """Capsules joining consecutive joint origins, expressed in the distal frame.

    Links whose two origins coincide get no capsule.
    """
    caps = []
    for p in links:
        # origin of frame i-1 seen from frame i; independent of the joint value
        p0 = np.array([-p.a, -p.d * math.sin(p.alpha), -p.d * math.cos(p.alpha)])
        if p.joint_kind == PRISMATIC or np.linalg.norm(p0) == 0.0:
            caps.append(None)
        else:
            caps.append(LinkCapsule(p0, np.zeros(3), radius))
    return caps


def joint_pose(robot: RobotModel, config, joint_index: int) -> np.ndarray:
    """World pose of joint ``joint_index`` (base transform times the first
    ``joint_index + 1`` link transforms)."""
    q = np.asarray(config, dtype=float)
    if not 0 <= joint_index < robot.dof:
        raise ValueError(f"joint index {joint_index} out of range for {robot.dof}-DOF robot")
    if q.shape != (robot.dof,):
        raise ValueError(f"expected configuration of length {robot.dof}, got shape {q.shape}")
    T = robot.base_transform
    for i in range(joint_index + 1):
        T = T @ dh_transform(robot.links[i], q[i])
    return T


def joint_poses(robot: RobotModel, config) -> np.ndarray:
    """All joint poses, shape (D, 4, 4)."""
    q = np.asarray(config, dtype=float)
    if q.shape != (robot.dof,):
        raise ValueError(f"expected configuration of length {robot.dof}, got shape {q.shape}")
    out = np.empty((robot.dof, 4, 4))
    T = robot.base_transform
    for i, p in enumerate(robot.links):
        T = T @ dh_transform(p, q[i])
        out[i] = T
    return out


def control_point_positions(robot: RobotModel, config) -> np.ndarray:
    """World positions of the robot's control points, shape (M, 3)."""
    poses = joint_poses(robot, config)
    return np.stack(
        [(poses[cp.joint_index] @ cp.transform)[:3, 3] for cp in robot.control_points]
    )


def control_point_positions_batch(robot: RobotModel, configs) -> np.ndarray:
    """Compiled control-point positions for many configurations, shape (N, M, 3)."""
    Q = np.ascontiguousarray(np.atleast_2d(configs), dtype=float)
    if Q.shape[1] != robot.dof:
        raise ValueError(f"expected configurations with {robot.dof} columns")
    return _jit.fk_points_batch(
        robot.base_transform, robot.dh_table, robot.prismatic, robot.cp_joint, robot.cp_transform, Q
    )


# ----------------------------------------------------------------------------
# robot files

_PI_EXPR = re.compile(r"^\s*(-?)\s*([0-9.]*)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$")


def _num(value) -> float:
    """Parse a number, also accepting forms like ``pi/2``, ``-pi`` or ``3*pi/4``."""
    if isinstance(value, str):
        m = _PI_EXPR.match(value)
        if m is None:
            return float(value)
        sign = -1.0 if m.group(1) else 1.0
        k = float(m.group(2)) if m.group(2) else 1.0
        div = float(m.group(3)) if m.group(3) else 1.0
        return sign * k * math.pi / div
    return float(value)


def _vec(values) -> np.ndarray:
    return np.array([_num(v) for v in values], dtype=float)


def _transform_from_record(rec) -> np.ndarray:
    if rec is None:
        return np.eye(4)
    if "matrix" in rec:
        return np.array([[_num(v) for v in row] for row in rec["matrix"]], dtype=float)
    rot = rpy_matrix(*_vec(rec.get("rpy", [0, 0, 0])))
    return make_transform(rot, _vec(rec.get("translation", [0, 0, 0])))


def robot_from_dict(data: dict) -> RobotModel:
    links, limits, capsules = [], [], []
    for rec in data["links"]:
        p = DHParams(
            theta_offset=_num(rec.get("theta_offset", 0.0)),
            d=_num(rec.get("d", 0.0)),
            a=_num(rec.get("a", 0.0)),
            alpha=_num(rec.get("alpha", 0.0)),
            joint_kind=rec.get("joint", REVOLUTE),
        )
        links.append(p)
        limits.append(_vec(rec["limits"]))
        cap = rec.get("capsule")
        if cap is None:
            capsules.append(None)
        elif "p0" in cap:
            capsules.append(LinkCapsule(_vec(cap["p0"]), _vec(cap["p1"]), _num(cap["radius"])))
        else:
            capsules.append(straight_link_capsules([p], _num(cap["radius"]))[0])
    cps = None
    if data.get("control_points"):
        cps = [
            ControlPointSpec(int(c["joint"]), _transform_from_record(c))
            for c in data["control_points"]
        ]
    return RobotModel(
        links,
        limits,
        base_transform=_transform_from_record(data.get("base_transform")),
        control_points=cps,
        link_capsules=capsules,
        name=data.get("name", "robot"),
    )


ROBOT_DIR = Path(__file__).parent / "data" / "robots"


def load_robot(path) -> RobotModel:
    """Load a robot from a YAML file, or a shipped robot by bare name."""
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = ROBOT_DIR / f"{path}.yaml"
    with open(p) as f:
        return robot_from_dict(yaml.safe_load(f))
