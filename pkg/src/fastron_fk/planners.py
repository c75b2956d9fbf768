"""Sampling-based planners (RRT, RRT-Connect, RRT*) over a pluggable collision
checker, and verify-and-repair of proxy-planned paths against an oracle.

A checker is any callable mapping a configuration to +1 (collision) or -1
(free): a trained ``FastronModel`` or a ``CollisionOracle`` both qualify.
Planners only ever touch collision state through the checker they are given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from fastron_fk.kinematics import RobotModel

Checker = Callable[[np.ndarray], int]

RRT = "rrt"
RRT_CONNECT = "rrt_connect"
RRT_STAR = "rrt_star"
PLANNERS = (RRT, RRT_CONNECT, RRT_STAR)


class PlanningError(RuntimeError):
    pass


class InvalidEndpointError(PlanningError, ValueError):
    """Start or goal is in collision according to the checker."""


class PlanningFailure(PlanningError):
    """No path found within the iteration cap."""


class RepairError(PlanningError):
    """Replanning an invalid stretch of a path failed.

    ``segment`` holds the waypoint indices (first, last) of the stretch that
    could not be repaired.
    """

    def __init__(self, message, segment):
        super().__init__(message)
        self.segment = segment


class CountingChecker:
    """Wraps a checker and counts calls."""

    def __init__(self, checker: Checker):
        self.checker = checker
        self.n_calls = 0

    def __call__(self, q) -> int:
        self.n_calls += 1
        return self.checker(q)


@dataclass(frozen=True)
class PlannerParams:
    step_size: float
    resolution: float
    goal_bias: float = 0.05
    max_iterations: int = 5000
    seed: int = 0
    rewire_radius: float = 1.0

    def __post_init__(self):
        if not 0 <= self.goal_bias < 1:
            raise ValueError("goal_bias must lie in [0, 1)")
        for name in ("step_size", "resolution", "max_iterations", "rewire_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def for_robot(cls, robot: RobotModel, **overrides) -> "PlannerParams":
        """Defaults scaled to the joint ranges: edges checked every 1/50 of the
        joint-range diagonal, steps of 1/10 and a rewire radius of 1/5."""
        diag = float(np.linalg.norm(robot.joint_range))
        base = dict(step_size=diag / 10, resolution=diag / 50, rewire_radius=diag / 5)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    def with_seed(self, seed: int) -> "PlannerParams":
        return replace(self, seed=seed)


@dataclass
class Path:
    waypoints: np.ndarray
    valid: bool | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.waypoints = np.atleast_2d(np.asarray(self.waypoints, dtype=float))

    def __len__(self):
        return len(self.waypoints)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1).sum())

    def interpolated(self, resolution: float) -> np.ndarray:
        """All waypoints plus intermediate configurations no more than
        ``resolution`` apart."""
        out = [self.waypoints[:1]]
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            out.append(_edge_points(a, b, resolution)[1:])
        return np.concatenate(out)

    def to_text(self) -> str:
        return "".join(" ".join(repr(float(v)) for v in w) + "\n" for w in self.waypoints)

    def save(self, path):
        with open(path, "w") as f:
            f.write(self.to_text())

    @classmethod
    def load(cls, path) -> "Path":
        return cls(np.loadtxt(path, ndmin=2))


def _edge_points(a, b, resolution) -> np.ndarray:
    d = b - a
    n = max(1, math.ceil(math.sqrt(d @ d) / resolution))
    t = np.arange(n + 1) / n
    return a + t[:, None] * d


def edge_valid(checker: Checker, a, b, resolution: float) -> bool:
    """True iff every configuration on the straight segment a-b, sampled at
    spacing at most ``resolution`` including both endpoints, is free."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pts = _edge_points(a, b, resolution)
    # endpoints first: most rejections happen there
    order = [len(pts) - 1, 0, *range(1, len(pts) - 1)] if len(pts) > 1 else [0]
    return all(checker(pts[i]) < 0 for i in order)


def _check_endpoints(checker, start, goal):
    if checker(start) > 0:
        raise InvalidEndpointError("start configuration is in collision")
    if checker(goal) > 0:
        raise InvalidEndpointError("goal configuration is in collision")


class _Tree:
    def __init__(self, root, capacity=256):
        self.nodes = np.empty((capacity, len(root)))
        self.nodes[0] = root
        self.parent = np.full(capacity, -1, dtype=np.int64)
        self.n = 1

    def add(self, q, parent) -> int:
        i = self.n
        if i == len(self.nodes):
            self.nodes = np.concatenate([self.nodes, np.empty_like(self.nodes)])
            self.parent = np.concatenate([self.parent, np.full_like(self.parent, -1)])
        self.nodes[i] = q
        self.parent[i] = parent
        self.n += 1
        return i

    def nearest(self, q) -> int:
        d = self.nodes[: self.n] - q
        return int(np.argmin(np.einsum("ij,ij->i", d, d)))

    def near(self, q, radius) -> np.ndarray:
        d = self.nodes[: self.n] - q
        return np.flatnonzero(np.einsum("ij,ij->i", d, d) <= radius * radius)

    def branch(self, i) -> list:
        out = []
        while i >= 0:
            out.append(self.nodes[i])
            i = int(self.parent[i])
        return out[::-1]


def _dist(a, b) -> float:
    d = b - a
    return math.sqrt(d @ d)


def _steer(a, b, step) -> np.ndarray:
    d = b - a
    n = math.sqrt(d @ d)
    return b.copy() if n <= step else a + d * (step / n)


def _sample(rng, limits, goal, goal_bias):
    if goal_bias > 0 and rng.random() < goal_bias:
        return goal.copy()
    return limits[:, 0] + rng.random(len(limits)) * (limits[:, 1] - limits[:, 0])


def _prepare(checker, start, goal, limits):
    start = np.asarray(start, dtype=float).copy()
    goal = np.asarray(goal, dtype=float).copy()
    _check_endpoints(checker, start, goal)
    return start, goal, np.asarray(limits, dtype=float)


def plan_rrt(checker: Checker, start, goal, params: PlannerParams, limits) -> Path:
    """RRT with goal bias. ``limits`` is the (D, 2) joint box to sample from.
    Returns the first path found; raises ``PlanningFailure`` at the cap."""
    start, goal, limits = _prepare(checker, start, goal, limits)
    rng = np.random.default_rng(params.seed)
    tree = _Tree(start)
    for it in range(1, params.max_iterations + 1):
        if it == 1 and _dist(start, goal) <= params.step_size:
            q_new, near = start, 0
        else:
            q_rand = _sample(rng, limits, goal, params.goal_bias)
            near = tree.nearest(q_rand)
            q_new = _steer(tree.nodes[near], q_rand, params.step_size)
            if not edge_valid(checker, tree.nodes[near], q_new, params.resolution):
                continue
            near = tree.add(q_new, near)
        if _dist(q_new, goal) <= params.step_size and edge_valid(checker, q_new, goal, params.resolution):
            wp = tree.branch(near)
            if not np.array_equal(wp[-1], goal):
                wp.append(goal)
            return Path(np.array(wp), info={"iterations": it, "nodes": tree.n})
    raise PlanningFailure(f"RRT found no path in {params.max_iterations} iterations")


_TRAPPED, _ADVANCED, _REACHED = 0, 1, 2


def _extend(tree: _Tree, q, checker, params) -> tuple[int, int]:
    near = tree.nearest(q)
    q_new = _steer(tree.nodes[near], q, params.step_size)
    if not edge_valid(checker, tree.nodes[near], q_new, params.resolution):
        return _TRAPPED, near
    i = tree.add(q_new, near)
    return (_REACHED if np.array_equal(q_new, q) else _ADVANCED), i


def plan_rrt_connect(checker: Checker, start, goal, params: PlannerParams, limits) -> Path:
    """Bidirectional RRT: extend one tree toward a random sample, then greedily
    connect the other tree to the new node; the trees swap roles each
    iteration."""
    start, goal, limits = _prepare(checker, start, goal, limits)
    rng = np.random.default_rng(params.seed)
    if _dist(start, goal) <= params.step_size and edge_valid(checker, start, goal, params.resolution):
        return Path(np.array([start, goal]), info={"iterations": 1, "nodes": 2})
    ta, tb = _Tree(start), _Tree(goal)
    a_is_start = True
    for it in range(1, params.max_iterations + 1):
        q_rand = _sample(rng, limits, tb.nodes[0], params.goal_bias)
        status, ia = _extend(ta, q_rand, checker, params)
        if status != _TRAPPED:
            target = ta.nodes[ia]
            status, ib = _extend(tb, target, checker, params)
            while status == _ADVANCED:
                status, ib = _extend(tb, target, checker, params)
            if status == _REACHED:
                # both branches end at the shared meeting node
                if a_is_start:
                    wp = ta.branch(ia) + tb.branch(ib)[::-1][1:]
                else:
                    wp = tb.branch(ib) + ta.branch(ia)[::-1][1:]
                return Path(np.array(wp), info={"iterations": it, "nodes": ta.n + tb.n})
        ta, tb = tb, ta
        a_is_start = not a_is_start
    raise PlanningFailure(f"RRT-Connect found no path in {params.max_iterations} iterations")


def plan_rrt_star(checker: Checker, start, goal, params: PlannerParams, limits, audit: list | None = None) -> Path:
    """RRT* (choose-parent and rewiring within ``rewire_radius``), stopped at
    the first feasible path. If ``audit`` is a list, a copy of the node cost
    array is appended after every iteration."""
    start, goal, limits = _prepare(checker, start, goal, limits)
    rng = np.random.default_rng(params.seed)
    tree = _Tree(start, params.max_iterations)
    cost = np.zeros(params.max_iterations + 1)
    children: list[list[int]] = [[]]
    res = params.resolution

    def _propagate(i, delta):
        stack = list(children[i])
        while stack:
            j = stack.pop()
            cost[j] -= delta
            stack.extend(children[j])

    for it in range(1, params.max_iterations + 1):
        if it == 1 and _dist(start, goal) <= params.step_size:
            new = 0
        else:
            q_rand = _sample(rng, limits, goal, params.goal_bias)
            nearest = tree.nearest(q_rand)
            q_new = _steer(tree.nodes[nearest], q_rand, params.step_size)
            if not edge_valid(checker, tree.nodes[nearest], q_new, res):
                if audit is not None:
                    audit.append(cost[: tree.n].copy())
                continue
            near = tree.near(q_new, params.rewire_radius)
            dist = np.linalg.norm(tree.nodes[near] - q_new, axis=1)
            best, best_cost = nearest, cost[nearest] + _dist(tree.nodes[nearest], q_new)
            for j, dj in sorted(zip(near.tolist(), dist.tolist()), key=lambda t: cost[t[0]] + t[1]):
                c = cost[j] + dj
                if c >= best_cost:
                    break
                if edge_valid(checker, tree.nodes[j], q_new, res):
                    best, best_cost = j, c
                    break
            new = tree.add(q_new, best)
            cost[new] = best_cost
            children.append([])
            children[best].append(new)
            for j, dj in zip(near.tolist(), dist.tolist()):
                c = best_cost + dj
                if j == best or c >= cost[j]:
                    continue
                if edge_valid(checker, q_new, tree.nodes[j], res):
                    old = int(tree.parent[j])
                    children[old].remove(j)
                    children[new].append(j)
                    tree.parent[j] = new
                    delta = cost[j] - c
                    cost[j] = c
                    _propagate(j, delta)
        if audit is not None:
            audit.append(cost[: tree.n].copy())
        q_new = tree.nodes[new]
        if _dist(q_new, goal) <= params.step_size and edge_valid(checker, q_new, goal, res):
            wp = tree.branch(new)
            if not np.array_equal(wp[-1], goal):
                wp.append(goal)
            return Path(np.array(wp), info={"iterations": it, "nodes": tree.n})
    raise PlanningFailure(f"RRT* found no path in {params.max_iterations} iterations")


_PLANNER_FUNCS = {RRT: plan_rrt, RRT_CONNECT: plan_rrt_connect, RRT_STAR: plan_rrt_star}


def plan(kind: str, checker: Checker, start, goal, params: PlannerParams, limits) -> Path:
    try:
        fn = _PLANNER_FUNCS[kind]
    except KeyError:
        raise ValueError(f"unknown planner {kind!r}; expected one of {PLANNERS}") from None
    return fn(checker, start, goal, params, limits)


def invalid_stretches(path: Path, oracle: Checker, resolution: float) -> list[tuple[int, int]]:
    """Waypoint index pairs (i, j) to replan between: each maximal run of
    invalid edges, widened by one waypoint on both sides, with overlapping
    stretches merged."""
    wp = path.waypoints
    bad = [not edge_valid(oracle, wp[k], wp[k + 1], resolution) for k in range(len(wp) - 1)]
    if len(wp) == 1 and oracle(wp[0]) > 0:
        raise RepairError("single-waypoint path is in collision", (0, 0))
    out: list[list[int]] = []
    k = 0
    while k < len(bad):
        if not bad[k]:
            k += 1
            continue
        e = k
        while e + 1 < len(bad) and bad[e + 1]:
            e += 1
        i, j = max(k - 1, 0), min(e + 2, len(wp) - 1)
        if out and i <= out[-1][1]:
            out[-1][1] = j
        else:
            out.append([i, j])
        k = e + 1
    return [tuple(s) for s in out]


def repair(path: Path, stretches, kind: str, params: PlannerParams, oracle: Checker, limits) -> Path:
    """Replace each stretch with a path planned by ``kind`` using the oracle."""
    wp = path.waypoints
    parts = []
    prev = 0
    for n, (i, j) in enumerate(stretches):
        parts.append(wp[prev:i])
        try:
            sub = plan(kind, oracle, wp[i], wp[j], params.with_seed(params.seed + 1 + n), limits)
        except PlanningError as err:
            raise RepairError(f"could not repair waypoints {i}..{j}: {err}", (i, j)) from err
        parts.append(sub.waypoints[:-1])
        prev = j
    parts.append(wp[prev:])
    return Path(np.concatenate(parts), valid=True, info=dict(path.info, repaired=len(stretches)))


def verify_and_repair(path: Path, params: PlannerParams, oracle: Checker, kind: str, limits) -> Path:
    """Check every edge with the oracle and replan the invalid stretches with
    the oracle as checker. Returns ``path`` itself, marked valid, when nothing
    needs repair."""
    stretches = invalid_stretches(path, oracle, params.resolution)
    if not stretches:
        path.valid = True
        path.info.setdefault("repaired", 0)
        return path
    return repair(path, stretches, kind, params, oracle, limits)


def path_valid(path: Path, checker: Checker, resolution: float) -> bool:
    wp = path.waypoints
    if len(wp) == 1:
        return checker(wp[0]) < 0
    return all(edge_valid(checker, a, b, resolution) for a, b in zip(wp[:-1], wp[1:]))
