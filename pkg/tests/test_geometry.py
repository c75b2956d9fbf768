import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fastron_fk.geometry import (
    Box,
    Capsule,
    CollisionOracle,
    Hull,
    MotionScript,
    Scene,
    Sphere,
    ellipsoid_hull,
    gjk_intersect,
    grid_ground_truth,
    in_collision,
    load_scene,
    robot_capsules,
    scene_from_dict,
)
from fastron_fk.kinematics import control_point_positions, load_robot, make_transform, rpy_matrix, RobotModel

BOUNDS = np.array([[-5.0, -5.0, -5.0], [5.0, 5.0, 5.0]])


def random_rotation(rng):
    return rpy_matrix(*rng.uniform(-np.pi, np.pi, 3))


def random_shape(rng, kind):
    c = rng.uniform(-1, 1, 3)
    if kind == "sphere":
        return Sphere(c, rng.uniform(0.1, 0.6))
    if kind == "capsule":
        return Capsule(c, c + rng.uniform(-0.8, 0.8, 3), rng.uniform(0.05, 0.4))
    if kind == "box":
        return Box(c, rng.uniform(0.1, 0.6, 3), random_rotation(rng))
    return ellipsoid_hull(c, rng.uniform(0.2, 0.6, 3), 42)


KINDS = ["sphere", "capsule", "box", "hull"]


def test_sphere_examples():
    assert not gjk_intersect(Sphere([0, 0, 0], 1.0), Sphere([3, 0, 0], 1.0))
    assert gjk_intersect(Sphere([0, 0, 0], 1.0), Sphere([1, 0, 0], 1.0))


def test_near_tangent_counts_as_hit():
    assert gjk_intersect(Sphere([0, 0, 0], 1.0), Sphere([2 + 5e-10, 0, 0], 1.0))
    assert not gjk_intersect(Sphere([0, 0, 0], 1.0), Sphere([2 + 1e-6, 0, 0], 1.0))
    box = Box([0, 0, 0], [1, 1, 1])
    assert gjk_intersect(box, Sphere([2 + 5e-10, 0, 0], 1.0))
    assert not gjk_intersect(box, Sphere([2 + 1e-6, 0, 0], 1.0))


def test_shape_validation():
    with pytest.raises(ValueError):
        Sphere([0, 0, 0], 0.0)
    with pytest.raises(ValueError):
        Box([0, 0, 0], [1, 0, 1])
    with pytest.raises(ValueError):
        Capsule([0, 0, 0], [1, 0, 0], -1.0)
    with pytest.raises(ValueError):
        Hull(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], float))


def test_capsule_box_against_distance_oracle():
    rng = np.random.default_rng(2024)
    counter = np.zeros(1, dtype=np.int64)
    checked = hits = 0
    while checked < 1000:
        box = Box(rng.uniform(-0.5, 0.5, 3), rng.uniform(0.05, 0.6, 3), random_rotation(rng))
        p0 = rng.uniform(-1.0, 1.0, 3)
        cap = Capsule(p0, p0 + rng.uniform(-1, 1, 3), rng.uniform(0.02, 0.4))
        d = oracles.segment_box_distance(cap.p0, cap.p1, box.center, box.half_extents, box.rotation)
        if abs(d - cap.radius) < 1e-6:
            continue
        expected = d <= cap.radius
        assert gjk_intersect(cap, box, counter) == expected
        assert gjk_intersect(box, cap, counter) == expected
        checked += 1
        hits += expected
    assert 100 < hits < 900  # both outcomes well represented
    assert counter[0] == 0


def test_box_and_its_hull_agree():
    rng = np.random.default_rng(3)
    signs = np.array([[i, j, k] for i in (-1, 1) for j in (-1, 1) for k in (-1, 1)], float)
    for _ in range(300):
        box = Box(rng.uniform(-0.5, 0.5, 3), rng.uniform(0.1, 0.6, 3), random_rotation(rng))
        hull = Hull(box.center + (signs * box.half_extents) @ box.rotation.T)
        other = random_shape(rng, KINDS[rng.integers(4)])
        assert gjk_intersect(box, other) == gjk_intersect(hull, other)


def test_sphere_capsule_closed_form():
    rng = np.random.default_rng(4)
    for _ in range(500):
        s = random_shape(rng, "sphere")
        c = random_shape(rng, "capsule")
        d = oracles.segment_point_distance(c.p0, c.p1, s.center)
        if abs(d - s.radius - c.radius) < 1e-9:
            continue
        assert gjk_intersect(s, c) == (d < s.radius + c.radius)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(KINDS), st.sampled_from(KINDS))
def test_symmetry_translation_and_inflation(seed, ka, kb):
    rng = np.random.default_rng(seed)
    a, b = random_shape(rng, ka), random_shape(rng, kb)
    hit = gjk_intersect(a, b)
    assert gjk_intersect(b, a) == hit
    t = rng.uniform(-3, 3, 3)
    # translation can move a pair across the 1e-9 tangency band only if it was
    # already within rounding of it
    assert gjk_intersect(a.translated(t), b.translated(t)) == hit
    if hit:
        assert gjk_intersect(a.inflated(0.05), b)
        assert gjk_intersect(a, b.inflated(0.05))


def test_robot_capsules_straight_arm(planar2):
    caps = robot_capsules(planar2, [0.0, 0.0])
    assert np.allclose(caps[0].p0, [0, 0, 0]) and np.allclose(caps[0].p1, [1, 0, 0])
    assert np.allclose(caps[1].p0, [1, 0, 0]) and np.allclose(caps[1].p1, [2, 0, 0])


def test_robot_capsules_follow_base_motion(rng):
    arm = load_robot("arm3")
    R = rpy_matrix(0.3, -0.2, 1.1)
    t = np.array([0.4, -0.1, 0.2])
    moved = RobotModel(arm.links, arm.joint_limits, make_transform(R, t) @ arm.base_transform,
                       link_capsules=arm.link_capsules)
    for q in arm.sample(rng, 20):
        for c0, c1 in zip(robot_capsules(arm, q), robot_capsules(moved, q)):
            assert np.allclose(R @ c0.p0 + t, c1.p0, atol=1e-12)
            assert np.allclose(R @ c0.p1 + t, c1.p1, atol=1e-12)


@pytest.mark.parametrize("name", ["planar2", "arm3", "arm7"])
def test_capsule_endpoints_meet_control_points(name, rng):
    robot = load_robot(name)
    for q in robot.sample(rng, 20):
        ends = np.array([c.p1 for c in robot_capsules(robot, q)])
        P = control_point_positions(robot, q)
        assert np.allclose(np.sort(ends, axis=0), np.sort(P, axis=0), atol=1e-12)


def test_empty_and_engulfing_scenes(arm3, rng):
    Q = arm3.sample(rng, 200)
    assert np.all(CollisionOracle(arm3, Scene([], BOUNDS)).labels(Q) == -1)
    big = Scene([Box([0, 0, 0], [5, 5, 5])], BOUNDS)
    assert np.all(CollisionOracle(arm3, big).labels(Q) == 1)
    assert in_collision(arm3, Q[0], big) == 1


def test_planar_grid_matches_distance_oracle(planar2):
    box = Box([1.2, 0.6, 0.0], [0.3, 0.2, 0.4], rpy_matrix(0, 0, 0.4))
    scene = Scene([box], BOUNDS)
    grid = grid_ground_truth(planar2, scene, 100)
    axes = np.linspace(-np.pi, np.pi, 100)
    for i, a in enumerate(axes):
        for j, b in enumerate(axes):
            caps = robot_capsules(planar2, [a, b])
            d = min(oracles.segment_box_distance(c.p0, c.p1, box.center, box.half_extents, box.rotation) for c in caps)
            if abs(d - 0.05) < 1e-6:
                continue
            assert grid[i, j] == (1 if d <= 0.05 else -1)
    assert (grid == 1).any() and (grid == -1).any()


def test_grid_rejects_high_dof(arm7):
    with pytest.raises(NotImplementedError):
        grid_ground_truth(arm7, Scene([], BOUNDS), 4)


def _components(mask):
    seen = np.zeros_like(mask, dtype=bool)
    count = 0
    for start in zip(*np.nonzero(mask)):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            cell = stack.pop()
            for ax in range(mask.ndim):
                for step in (-1, 1):
                    nb = list(cell)
                    nb[ax] += step
                    nb = tuple(nb)
                    if 0 <= nb[ax] < mask.shape[ax] and mask[nb] and not seen[nb]:
                        seen[nb] = True
                        stack.append(nb)
    return count


def test_cube_cspace_is_connected_and_continuous(arm3):
    cube = Box([0.9, 0.3, 0.6], [0.2, 0.2, 0.2])
    grid = grid_ground_truth(arm3, Scene([cube], BOUNDS), 24)
    assert (grid == 1).any()
    # joint 0 wraps around at +-pi; the cube does not straddle that seam
    assert _components(grid == 1) == 1
    moved = grid_ground_truth(arm3, Scene([cube.translated([0.01, 0, 0])], BOUNDS), 24)
    assert abs(np.sum(moved == 1) - np.sum(grid == 1)) < 0.01 * grid.size


def test_adding_obstacles_never_frees(arm3, rng):
    Q = arm3.sample(rng, 500)
    obstacles = []
    prev = CollisionOracle(arm3, Scene([], BOUNDS)).labels(Q)
    for _ in range(6):
        obstacles.append(random_shape(rng, KINDS[rng.integers(4)]))
        now = CollisionOracle(arm3, Scene(obstacles, BOUNDS)).labels(Q)
        assert np.all(now >= prev)
        prev = now


def test_batch_and_single_labels_agree(arm3, rng):
    scene = load_scene("drifting_cubes").build(rng)
    oracle = CollisionOracle(arm3, scene)
    Q = arm3.sample(rng, 300)
    assert oracle.labels(Q).tolist() == [oracle(q) for q in Q]
    assert oracle.n_calls == 600
    assert oracle.n_capped == 0


def test_scene_bounds_and_motion():
    with pytest.raises(ValueError):
        Scene([Sphere([6, 0, 0], 0.5)], BOUNDS)
    scene = Scene([Sphere([4.9, 0, 0], 0.5)], BOUNDS)
    assert np.allclose(scene.moved([[1.0, 0, 0]]).obstacles[0].center, [5, 0, 0])
    motion = MotionScript(steps=30, step_range=(0.02, 0.08), axes=np.array([1, 1, 0]), seed=3)
    d = motion.displacements(4)
    assert d.shape == (30, 4, 3)
    norms = np.linalg.norm(d, axis=2)
    assert np.all((norms >= 0.02) & (norms <= 0.08))
    assert np.all(d[:, :, 2] == 0)
    assert np.array_equal(d, motion.displacements(4))
    scenes = list(motion.scenes(Scene([Sphere([0, 0, 0], 0.5)], BOUNDS)))
    assert len(scenes) == 30


def test_scene_file_parsing(rng):
    spec = scene_from_dict({
        "bounds": {"lo": [-2, -2, -2], "hi": [2, 2, 2]},
        "obstacles": [
            {"kind": "sphere", "center": [0, 0, 1], "radius": 0.2},
            {"kind": "capsule", "p0": [0, 0, 0], "p1": [0, 1, 0], "radius": 0.1},
            {"kind": "box", "center": [1, 0, 0], "half_extents": [0.1, 0.2, 0.3], "rpy": [0, 0, "pi/4"]},
            {"kind": "hull", "center": [-1, 0, 0], "radii": [0.2, 0.3, 0.4], "n_vertices": 50},
            {"kind": "hull", "vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]},
        ],
        "random_obstacles": {"count": 3, "kind": "sphere", "size": [0.1, 0.2],
                             "keep_out": {"center": [0, 0, 0], "radius": 0.5}},
        "motion": {"steps": 4, "step_size": [0.1, 0.2]},
    })
    scene = spec.build(rng)
    assert len(scene.obstacles) == 8
    assert all(np.linalg.norm(o.center) >= 0.5 for o in scene.obstacles[5:])
    with pytest.raises(ValueError):
        spec.build()
    with pytest.raises(ValueError):
        scene_from_dict({"bounds": {"lo": [0, 0, 0], "hi": [1, 1, 1]}, "obstacles": [{"kind": "torus"}]})
