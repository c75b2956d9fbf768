"""Scenes of convex obstacles, scene files and scripted obstacle motion."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from fastron_fk.geometry import _gjk
from fastron_fk.geometry.shapes import Box, Capsule, Hull, Sphere, ellipsoid_hull
from fastron_fk.kinematics import _num, _vec, rpy_matrix


@dataclass
class Scene:
    obstacles: list
    bounds: np.ndarray  # (2, 3): lower and upper corner

    def __post_init__(self):
        self.obstacles = list(self.obstacles)
        self.bounds = np.asarray(self.bounds, dtype=float).reshape(2, 3)
        for ob in self.obstacles:
            p = ob.position
            if not np.all(np.isfinite(p)):
                raise ValueError("obstacle position must be finite")
            if np.any(p < self.bounds[0] - 1e-12) or np.any(p > self.bounds[1] + 1e-12):
                raise ValueError(f"obstacle at {p} lies outside the scene bounds")
        self._packed = None

    def with_obstacles(self, obstacles) -> "Scene":
        return Scene(list(obstacles), self.bounds)

    def moved(self, displacements) -> "Scene":
        """Translate obstacle k by ``displacements[k]``, clamping its reference
        point to the bounds."""
        moved = []
        for ob, dv in zip(self.obstacles, np.asarray(displacements, dtype=float)):
            p = ob.position
            target = np.clip(p + dv, self.bounds[0], self.bounds[1])
            moved.append(ob.translated(target - p))
        return Scene(moved, self.bounds)

    def packed(self):
        """Flat arrays describing the obstacles for the compiled checker."""
        if self._packed is None:
            K = len(self.obstacles)
            kinds = np.zeros(K, dtype=np.int64)
            data = np.zeros((K, _gjk.DATA_LEN))
            radii = np.zeros(K)
            vstart = np.zeros(K, dtype=np.int64)
            vcount = np.zeros(K, dtype=np.int64)
            verts = []
            nv = 0
            for k, ob in enumerate(self.obstacles):
                kinds[k], data[k], v, radii[k] = ob.pack()
                vstart[k] = nv
                vcount[k] = len(v)
                nv += len(v)
                verts.append(v)
            V = np.ascontiguousarray(np.concatenate(verts) if verts else np.zeros((0, 3)))
            if len(V) == 0:
                V = np.zeros((0, 3))
            self._packed = (kinds, data, radii, vstart, vcount, V)
        return self._packed


@dataclass
class MotionScript:
    """Per-step obstacle displacements: a uniformly random unit direction
    (restricted to ``axes``) scaled by a step length drawn from ``step_range``."""

    steps: int
    step_range: tuple = (0.05, 0.15)
    axes: np.ndarray = field(default_factory=lambda: np.ones(3))
    seed: int = 0

    def displacements(self, n_obstacles: int, rng: np.random.Generator | None = None) -> np.ndarray:
        """Array of shape (steps, n_obstacles, 3)."""
        rng = np.random.default_rng(self.seed) if rng is None else rng
        axes = np.asarray(self.axes, dtype=float)
        out = np.zeros((self.steps, n_obstacles, 3))
        for s in range(self.steps):
            for k in range(n_obstacles):
                d = rng.standard_normal(3) * axes
                n = np.linalg.norm(d)
                while n == 0.0:
                    d = rng.standard_normal(3) * axes
                    n = np.linalg.norm(d)
                out[s, k] = d / n * rng.uniform(*self.step_range)
        return out

    def scenes(self, scene: Scene, rng: np.random.Generator | None = None):
        """Yield the scene after each step."""
        for dv in self.displacements(len(scene.obstacles), rng):
            scene = scene.moved(dv)
            yield scene


def shape_from_dict(rec: dict):
    kind = rec["kind"]
    if kind == "sphere":
        return Sphere(_vec(rec["center"]), _num(rec["radius"]))
    if kind == "capsule":
        return Capsule(_vec(rec["p0"]), _vec(rec["p1"]), _num(rec["radius"]))
    if kind == "box":
        rot = rpy_matrix(*_vec(rec.get("rpy", [0, 0, 0])))
        return Box(_vec(rec["center"]), _vec(rec["half_extents"]), rot)
    if kind == "hull":
        if "vertices" in rec:
            return Hull(np.array([_vec(v) for v in rec["vertices"]]))
        return ellipsoid_hull(_vec(rec["center"]), _vec(rec["radii"]), int(rec.get("n_vertices", 162)))
    raise ValueError(f"unknown obstacle kind {kind!r}")


@dataclass
class RandomObstacles:
    """Generator for obstacles with random size and placement."""

    count: int
    kind: str = "box"
    size_range: tuple = (0.1, 0.3)
    region: np.ndarray = None
    cubic: bool = True
    keep_out: tuple | None = None  # (center, radius): no obstacle center within

    def _allowed(self, c) -> bool:
        if self.keep_out is None:
            return True
        center, radius = self.keep_out
        return np.linalg.norm(c - np.asarray(center, dtype=float)) >= radius

    def sample(self, rng: np.random.Generator, bounds: np.ndarray, count: int | None = None) -> list:
        region = bounds if self.region is None else np.asarray(self.region, dtype=float)
        out = []
        for _ in range(self.count if count is None else count):
            c = rng.uniform(region[0], region[1])
            while not self._allowed(c):
                c = rng.uniform(region[0], region[1])
            if self.kind == "sphere":
                out.append(Sphere(c, rng.uniform(*self.size_range)))
            elif self.kind == "box":
                h = rng.uniform(*self.size_range, size=1 if self.cubic else 3)
                out.append(Box(c, np.broadcast_to(h, 3).copy()))
            else:
                raise ValueError(f"cannot randomize obstacle kind {self.kind!r}")
        return out


@dataclass
class SceneSpec:
    """Contents of a scene file: fixed obstacles, an optional random-obstacle
    generator, workspace bounds and a motion script."""

    bounds: np.ndarray
    obstacles: list = field(default_factory=list)
    random: RandomObstacles | None = None
    motion: MotionScript | None = None
    name: str = "scene"

    def build(self, rng: np.random.Generator | None = None, n_random: int | None = None) -> Scene:
        obs = list(self.obstacles)
        if self.random is not None:
            if rng is None:
                raise ValueError("scene has random obstacles; an rng is required")
            obs += self.random.sample(rng, self.bounds, n_random)
        return Scene(obs, self.bounds)


def scene_from_dict(data: dict) -> SceneSpec:
    b = data["bounds"]
    bounds = np.array([_vec(b["lo"]), _vec(b["hi"])])
    obstacles = [shape_from_dict(r) for r in data.get("obstacles", [])]
    rnd = None
    if data.get("random_obstacles"):
        r = data["random_obstacles"]
        region = None
        if "region" in r:
            region = np.array([_vec(r["region"]["lo"]), _vec(r["region"]["hi"])])
        rnd = RandomObstacles(
            count=int(r.get("count", 1)),
            kind=r.get("kind", "box"),
            size_range=tuple(_vec(r.get("size", [0.1, 0.3]))),
            region=region,
            cubic=bool(r.get("cubic", True)),
            keep_out=(_vec(r["keep_out"]["center"]), _num(r["keep_out"]["radius"])) if "keep_out" in r else None,
        )
    motion = None
    if data.get("motion"):
        m = data["motion"]
        motion = MotionScript(
            steps=int(m.get("steps", 30)),
            step_range=tuple(_vec(m.get("step_size", [0.05, 0.15]))),
            axes=_vec(m.get("axes", [1, 1, 1])),
            seed=int(m.get("seed", 0)),
        )
    return SceneSpec(bounds, obstacles, rnd, motion, data.get("name", "scene"))


SCENE_DIR = Path(__file__).resolve().parent.parent / "data" / "scenes"


def load_scene(path) -> SceneSpec:
    """Load a scene file, or a shipped scene by bare name."""
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = SCENE_DIR / f"{path}.yaml"
    with open(p) as f:
        return scene_from_dict(yaml.safe_load(f))
