"""Benchmark scenario files.

A scenario is a YAML mapping. Field names and defaults::

    name: str                      # label used in output tables
    robot: arm3                    # shipped robot name or path to a robot file
    scene: drifting_cubes          # shipped scene name or path to a scene file
    checkers: [fastron_fk, fastron_rq, oracle_gjk]
    trials: 20
    moves: 30                      # obstacle moves per trial (0: static scene)
    dataset_size: 1000             # initial labeled samples N
    test_size: 2000                # fresh oracle-labeled test set per evaluation
    test_grid: 13                  # optional: use the grid (13 points per joint)
                                   # as the test set instead, relabeled per move
    kernels: {fk: {gamma: 10}, rq: {gamma: 30}}
    train: {beta: 1, iter_max: 5000, s_max: 3000}
    timing: {queries: 10000, warmup: 1000}
    planner: {step_size, resolution, goal_bias, max_iterations, rewire_radius}
    planners: [rrt, rrt_connect, rrt_star]
    planning: {start: [...], goal: [...], positions: 5}
    sweep: {counts: [1, 5, 10, 25, 50], radius: 0.1, region: {lo, hi}}
    image: {resolution: 128, slice: 0.0}
    seed: 0

Relative file paths are resolved against the scenario file's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from fastron_fk.fastron import TrainParams
from fastron_fk.geometry.scene import SCENE_DIR, SceneSpec, load_scene
from fastron_fk.kernels import FK, RQ, KernelSpec
from fastron_fk.kinematics import ROBOT_DIR, RobotModel, _vec, load_robot
from fastron_fk.planners import PLANNERS, PlannerParams

FASTRON_FK = "fastron_fk"
FASTRON_RQ = "fastron_rq"
ORACLE = "oracle_gjk"
CHECKERS = (FASTRON_FK, FASTRON_RQ, ORACLE)
KERNEL_OF = {FASTRON_FK: FK, FASTRON_RQ: RQ}

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "data" / "scenarios"


class ConfigError(ValueError):
    pass


def _resolve(ref: str, base_dir: Path, shipped: Path) -> Path:
    p = Path(ref)
    if not p.is_absolute():
        local = base_dir / p
        if local.exists():
            return local
    if p.exists():
        return p
    named = shipped / f"{ref}.yaml"
    if not p.suffix and named.exists():
        return named
    raise FileNotFoundError(f"cannot find {ref!r}")


@dataclass
class SweepSpec:
    counts: tuple = (1, 5, 10, 25, 50)
    radius: float = 0.1
    region: np.ndarray | None = None


@dataclass
class ScenarioConfig:
    robot_path: Path
    scene_path: Path
    name: str = "scenario"
    checkers: tuple = CHECKERS
    trials: int = 1
    moves: int = 0
    dataset_size: int = 1000
    test_size: int = 2000
    test_grid: int | None = None
    gammas: dict = field(default_factory=lambda: {FK: 10.0, RQ: 30.0})
    train: TrainParams = field(default_factory=TrainParams)
    timing_queries: int = 10_000
    timing_warmup: int = 1000
    planner: dict = field(default_factory=dict)
    planners: tuple = PLANNERS
    start: np.ndarray | None = None
    goal: np.ndarray | None = None
    positions: int = 1
    sweep: SweepSpec = field(default_factory=SweepSpec)
    image_resolution: int = 128
    image_slice: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.moves < 0 or self.dataset_size < 1 or self.test_size < 1 or self.positions < 1:
            raise ConfigError("moves must be >= 0; dataset_size, test_size and positions >= 1")
        for c in self.checkers:
            if c not in CHECKERS:
                raise ConfigError(f"unknown checker {c!r}; expected a subset of {CHECKERS}")
        for p in self.planners:
            if p not in PLANNERS:
                raise ConfigError(f"unknown planner {p!r}; expected a subset of {PLANNERS}")
        if self.timing_queries < 1 or self.timing_warmup < 0:
            raise ConfigError("timing queries must be positive")
        counts = list(self.sweep.counts)
        if counts != sorted(counts) or (counts and (counts[0] < 0 or counts[-1] > 50)):
            raise ConfigError("sweep counts must be ascending within [0, 50]")
        for p in (self.robot_path, self.scene_path):
            if not Path(p).exists():
                raise FileNotFoundError(f"{p} does not exist")

    def robot(self) -> RobotModel:
        return load_robot(self.robot_path)

    def scene_spec(self) -> SceneSpec:
        return load_scene(self.scene_path)

    def kernel(self, checker: str) -> KernelSpec:
        kind = KERNEL_OF[checker]
        return KernelSpec(kind, float(self.gammas[kind]))

    def planner_params(self, robot: RobotModel) -> PlannerParams:
        return PlannerParams.for_robot(robot, **self.planner)

    def with_overrides(self, seed=None, trials=None, robot=None) -> "ScenarioConfig":
        kw = {}
        if seed is not None:
            kw["seed"] = int(seed)
        if trials is not None:
            kw["trials"] = int(trials)
        if robot is not None:
            kw["robot_path"] = _resolve(str(robot), Path.cwd(), ROBOT_DIR)
        return replace(self, **kw)


def scenario_from_dict(data: dict, base_dir=".") -> ScenarioConfig:
    base_dir = Path(base_dir)
    known = {
        "name", "robot", "scene", "checkers", "trials", "moves", "dataset_size", "test_size", "test_grid", "kernels",
        "train", "timing", "planner", "planners", "planning", "sweep", "image", "seed",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
    for req in ("robot", "scene"):
        if req not in data:
            raise ConfigError(f"scenario is missing {req!r}")
    kw = dict(
        robot_path=_resolve(str(data["robot"]), base_dir, ROBOT_DIR),
        scene_path=_resolve(str(data["scene"]), base_dir, SCENE_DIR),
    )
    for key in ("name", "trials", "moves", "dataset_size", "test_size", "test_grid", "seed"):
        if key in data:
            kw[key] = data[key]
    if "checkers" in data:
        kw["checkers"] = tuple(data["checkers"])
    if "planners" in data:
        kw["planners"] = tuple(data["planners"])
    if "kernels" in data:
        g = {FK: 10.0, RQ: 30.0}
        for kind, rec in data["kernels"].items():
            if kind not in g:
                raise ConfigError(f"unknown kernel {kind!r}")
            g[kind] = float(rec["gamma"])
        kw["gammas"] = g
    if "train" in data:
        try:
            kw["train"] = TrainParams(**data["train"])
        except TypeError as err:
            raise ConfigError(f"bad train section: {err}") from err
    if "timing" in data:
        kw["timing_queries"] = int(data["timing"].get("queries", 10_000))
        kw["timing_warmup"] = int(data["timing"].get("warmup", 1000))
    if "planner" in data:
        kw["planner"] = {k: float(v) if k != "max_iterations" else int(v) for k, v in data["planner"].items()}
    if "planning" in data:
        pl = data["planning"]
        kw["start"] = _vec(pl["start"]) if "start" in pl else None
        kw["goal"] = _vec(pl["goal"]) if "goal" in pl else None
        kw["positions"] = int(pl.get("positions", 1))
    if "sweep" in data:
        sw = data["sweep"]
        region = None
        if "region" in sw:
            region = np.array([_vec(sw["region"]["lo"]), _vec(sw["region"]["hi"])])
        kw["sweep"] = SweepSpec(tuple(int(c) for c in sw.get("counts", (1, 5, 10, 25, 50))), float(sw.get("radius", 0.1)), region)
    if "image" in data:
        kw["image_resolution"] = int(data["image"].get("resolution", 128))
        kw["image_slice"] = float(data["image"].get("slice", 0.0))
    try:
        return ScenarioConfig(**kw)
    except TypeError as err:
        raise ConfigError(str(err)) from err


def load_scenario(path) -> ScenarioConfig:
    """Load a scenario file, or a shipped scenario by bare name."""
    p = _resolve(str(path), Path.cwd(), SCENARIO_DIR)
    with open(p) as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ConfigError(f"{p} does not contain a mapping")
    return scenario_from_dict(data, p.parent)
