"""Convex workspace shapes."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from fastron_fk.geometry import _gjk

_NO_VERTS = np.zeros((0, 3))


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")

    def translated(self, t) -> "Sphere":
        return replace(self, center=self.center + t)

    def inflated(self, amount: float) -> "Sphere":
        return replace(self, radius=self.radius + amount)

    @property
    def position(self) -> np.ndarray:
        return self.center

    def pack(self):
        data = np.zeros(_gjk.DATA_LEN)
        data[0:3] = self.center
        return _gjk.POINT, data, _NO_VERTS, float(self.radius)


@dataclass(frozen=True)
class Capsule:
    p0: np.ndarray
    p1: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "p0", np.asarray(self.p0, dtype=float))
        object.__setattr__(self, "p1", np.asarray(self.p1, dtype=float))
        if not self.radius > 0:
            raise ValueError("capsule radius must be positive")

    def translated(self, t) -> "Capsule":
        return replace(self, p0=self.p0 + t, p1=self.p1 + t)

    def inflated(self, amount: float) -> "Capsule":
        return replace(self, radius=self.radius + amount)

    @property
    def position(self) -> np.ndarray:
        return 0.5 * (self.p0 + self.p1)

    def pack(self):
        data = np.zeros(_gjk.DATA_LEN)
        data[0:3] = self.p0
        data[3:6] = self.p1
        return _gjk.SEGMENT, data, _NO_VERTS, float(self.radius)


@dataclass(frozen=True)
class Box:
    center: np.ndarray
    half_extents: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "half_extents", np.asarray(self.half_extents, dtype=float))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        if not np.all(self.half_extents > 0):
            raise ValueError("box half extents must be positive")

    def translated(self, t) -> "Box":
        return replace(self, center=self.center + t)

    def inflated(self, amount: float) -> "Box":
        return replace(self, half_extents=self.half_extents + amount)

    @property
    def position(self) -> np.ndarray:
        return self.center

    def pack(self):
        data = np.zeros(_gjk.DATA_LEN)
        data[0:3] = self.center
        data[3:12] = self.rotation.ravel()
        data[12:15] = self.half_extents
        return _gjk.BOX, data, _NO_VERTS, 0.0

    def distance_to_point(self, p) -> float:
        """Euclidean distance from ``p`` to the solid box (0 inside)."""
        local = self.rotation.T @ (np.asarray(p, dtype=float) - self.center)
        excess = np.maximum(np.abs(local) - self.half_extents, 0.0)
        return float(np.linalg.norm(excess))


@dataclass(frozen=True)
class Hull:
    """Convex hull of a point cloud."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.ascontiguousarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", V)
        if V.ndim != 2 or V.shape[1] != 3 or len(V) < 4:
            raise ValueError("hull needs at least 4 vertices in 3-D")
        if np.linalg.matrix_rank(V[1:] - V[0], tol=1e-12) < 3:
            raise ValueError("hull vertices are coplanar")

    def translated(self, t) -> "Hull":
        return Hull(self.vertices + t)

    def inflated(self, amount: float) -> "Hull":
        c = self.position
        d = self.vertices - c
        n = np.linalg.norm(d, axis=1, keepdims=True)
        return Hull(c + d * (1.0 + amount / np.maximum(n, 1e-300)))

    @property
    def position(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def pack(self):
        data = np.zeros(_gjk.DATA_LEN)
        data[0:3] = self.position
        return _gjk.HULL, data, self.vertices, 0.0


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` roughly evenly spread unit vectors (deterministic)."""
    i = np.arange(n) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / n)
    theta = np.pi * (1.0 + 5**0.5) * i
    return np.column_stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)])


def ellipsoid_hull(center, radii, n: int = 162) -> Hull:
    """Polytope approximating an ellipsoid with ``n`` surface vertices."""
    return Hull(np.asarray(center, dtype=float) + fibonacci_sphere(n) * np.asarray(radii, dtype=float))


def gjk_intersect(a, b, counter=None) -> bool:
    """Whether two convex shapes intersect.

    Near-tangent pairs (gap below 1e-9) count as intersecting, as do pairs on
    which GJK exhausts its iteration budget; the latter increment ``counter[0]``
    when a counter array is given.
    """
    if counter is None:
        counter = np.zeros(1, dtype=np.int64)
    ka, da, va, ra = a.pack()
    kb, db, vb, rb = b.pack()
    return bool(_gjk.shapes_hit(ka, da, va, ra, kb, db, vb, rb, counter))
