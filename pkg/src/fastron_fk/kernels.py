"""Rational-quadratic and forward-kinematics kernels, plus lazy Gram columns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fastron_fk import _jit
from fastron_fk.kinematics import RobotModel, control_point_positions, control_point_positions_batch

RQ = "rq"
FK = "fk"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice and width.

    ``rq`` compares joint vectors after min-max scaling each joint to [0, 1];
    ``fk`` compares control-point positions in the workspace.
    """

    kind: str
    gamma: float

    def __post_init__(self):
        if self.kind not in (RQ, FK):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @classmethod
    def default(cls, kind: str, robot: RobotModel) -> "KernelSpec":
        if kind == FK:
            return cls(FK, 10.0 / robot.reach**2)
        return cls(RQ, 10.0 / robot.dof)


def rq_kernel(x, x_prime, gamma: float) -> float:
    """Second-order rational quadratic kernel ``(1 + gamma/2 |x - x'|^2)^-2``."""
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    if x.shape != x_prime.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x_prime.shape}")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    d2 = float(np.sum((x - x_prime) ** 2))
    return (1.0 + 0.5 * gamma * d2) ** -2


def fk_kernel(robot: RobotModel, x, x_prime, gamma: float) -> float:
    """Mean RQ kernel between corresponding control points of two configurations."""
    p = control_point_positions(robot, x)
    p_prime = control_point_positions(robot, x_prime)
    return float(np.mean([rq_kernel(a, b, gamma) for a, b in zip(p, p_prime)]))


def kernel(spec: KernelSpec, robot: RobotModel, x, x_prime) -> float:
    """Evaluate the kernel named by ``spec`` (RQ on normalized joints, or FK)."""
    if spec.kind == FK:
        return fk_kernel(robot, x, x_prime, spec.gamma)
    return rq_kernel(robot.normalize(x), robot.normalize(x_prime), spec.gamma)


def features(spec: KernelSpec, robot: RobotModel, configs) -> np.ndarray:
    """Per-sample representation the kernel compares: (N, M, 3) control points
    for FK, (N, D) normalized joints for RQ."""
    Q = np.atleast_2d(np.asarray(configs, dtype=float))
    if spec.kind == FK:
        return control_point_positions_batch(robot, Q)
    return np.ascontiguousarray(robot.normalize(Q))


def gram_matrix(spec: KernelSpec, robot: RobotModel, configs) -> np.ndarray:
    """Dense Gram matrix by a direct double loop over ``kernel``. Slow; for audits."""
    Q = np.atleast_2d(np.asarray(configs, dtype=float))
    N = len(Q)
    K = np.empty((N, N))
    for i in range(N):
        K[i, i] = kernel(spec, robot, Q[i], Q[i])
        for j in range(i + 1, N):
            K[i, j] = K[j, i] = kernel(spec, robot, Q[i], Q[j])
    return K


def summand_gram_matrices(robot: RobotModel, configs, gamma: float) -> np.ndarray:
    """Per-control-point RQ Gram matrices, shape (M, N, N)."""
    P = np.stack([control_point_positions(robot, q) for q in np.atleast_2d(configs)])
    diff = P[:, None, :, :] - P[None, :, :, :]
    d2 = np.einsum("ijmk,ijmk->mij", diff, diff)
    return (1.0 + 0.5 * gamma * d2) ** -2


class GramCache:
    """Lazily computed Gram columns over a fixed set of configurations.

    Features (control points for FK) are computed once for the whole set on
    first use; columns are computed on demand and kept. ``n_feature_evals``
    and ``n_column_evals`` count the work done.
    """

    def __init__(self, configs, spec: KernelSpec, robot: RobotModel):
        self.configs = np.atleast_2d(np.asarray(configs, dtype=float))
        self.spec = spec
        self.robot = robot
        self.columns: dict[int, np.ndarray] = {}
        self._features = None
        self.n_feature_evals = 0
        self.n_column_evals = 0

    def __len__(self):
        return len(self.configs)

    @property
    def features(self) -> np.ndarray:
        if self._features is None:
            self._features = features(self.spec, self.robot, self.configs)
            self.n_feature_evals += len(self.configs)
        return self._features

    def computed(self, index: int) -> bool:
        return index in self.columns

    def column(self, index: int) -> np.ndarray:
        col = self.columns.get(index)
        if col is None:
            if not 0 <= index < len(self.configs):
                raise IndexError(index)
            if self.spec.kind == FK:
                col = _jit.fk_column(self.features, index, self.spec.gamma)
            else:
                col = _jit.rq_column(self.features, index, self.spec.gamma)
            self.columns[index] = col
            self.n_column_evals += 1
        return col


def gram_column(cache: GramCache, index: int) -> np.ndarray:
    return cache.column(index)


def min_eigenvalue(matrix) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-9):
        raise ValueError("matrix is not symmetric")
    return float(np.linalg.eigvalsh(A)[0])
