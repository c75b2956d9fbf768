"""C-space pictures as binary portable pixmaps (PPM, P6)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fastron_fk.geometry import grid_axes, grid_configs

FREE_RGB = (255, 255, 255)
OBSTACLE_RGB = (60, 60, 60)
MISMATCH_RGB = (220, 40, 40)
SUPPORT_RGB = (30, 90, 230)


@dataclass(frozen=True)
class CspaceImage:
    pixels: np.ndarray  # (height, width, 3) uint8
    mismatch_fraction: float | None
    n_support_marked: int


def write_ppm(path, pixels: np.ndarray):
    h, w, _ = pixels.shape
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    fields = data.split(maxsplit=4)
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise ValueError("not an 8-bit binary PPM")
    w, h = int(fields[1]), int(fields[2])
    return np.frombuffer(fields[4], dtype=np.uint8, count=w * h * 3).reshape(h, w, 3)


def _slice(grid: np.ndarray, slice_index: int | None):
    if grid.ndim == 2:
        return grid, None
    if grid.ndim == 3:
        k = grid.shape[2] // 2 if slice_index is None else slice_index
        if not 0 <= k < grid.shape[2]:
            raise ValueError(f"slice index {k} outside the grid")
        return grid[:, :, k], k
    raise ValueError(f"C-space images need a 2- or 3-joint grid, got {grid.ndim} axes")


def render_cspace(grid: np.ndarray, model=None, slice_index: int | None = None) -> CspaceImage:
    """Render a grid of truth labels (+1 collision) for a 2-joint robot, or
    one slice of a 3-joint grid at fixed third-joint index.

    Joint 0 runs left to right and joint 1 bottom to top. With a model, cells
    where its prediction disagrees with the truth are drawn in the mismatch
    colour and support points near the slice are marked.
    """
    grid = np.asarray(grid)
    plane, k = _slice(grid, slice_index)
    n0, n1 = plane.shape
    rgb = np.where((plane > 0)[..., None], np.array(OBSTACLE_RGB, np.uint8), np.array(FREE_RGB, np.uint8))
    mismatch = None
    marked = 0
    if model is not None:
        robot = model.robot
        if robot.dof != grid.ndim:
            raise ValueError(f"grid has {grid.ndim} axes but the model's robot has {robot.dof} joints")
        Q = grid_configs(robot, grid.shape).reshape(*grid.shape, robot.dof)
        Qs = Q if k is None else Q[:, :, k]
        pred = model.predict(Qs.reshape(-1, robot.dof)).reshape(n0, n1)
        wrong = pred != np.where(plane > 0, 1, -1)
        rgb[wrong] = MISMATCH_RGB
        mismatch = float(wrong.mean())
        axes = grid_axes(robot, grid.shape)
        S = model.support
        if len(S):
            keep = np.ones(len(S), dtype=bool)
            if k is not None:
                step = axes[2][1] - axes[2][0] if len(axes[2]) > 1 else np.inf
                keep = np.abs(S[:, 2] - axes[2][k]) <= 0.5 * step
            for j, n in ((0, n0), (1, n1)):
                keep &= (S[:, j] >= robot.lower[j]) & (S[:, j] <= robot.upper[j])
            idx = [np.rint((S[keep, j] - robot.lower[j]) / robot.joint_range[j] * (n - 1)).astype(int)
                   for j, n in ((0, n0), (1, n1))]
            rgb[idx[0], idx[1]] = SUPPORT_RGB
            marked = int(keep.sum())
    # grid index (i0, i1) -> image row n1 - 1 - i1, column i0
    pixels = np.ascontiguousarray(rgb.transpose(1, 0, 2)[::-1])
    return CspaceImage(pixels, mismatch, marked)


def export_cspace_image(grid, path, model=None, slice_index: int | None = None) -> CspaceImage:
    img = render_cspace(grid, model, slice_index)
    write_ppm(path, img.pixels)
    return img
