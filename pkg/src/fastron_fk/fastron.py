"""Fastron proxy collision model: greedy kernel-perceptron training, queries,
two-stage active learning and the per-movement update cycle."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from fastron_fk import _jit
from fastron_fk.kernels import FK, GramCache, KernelSpec
from fastron_fk.kinematics import RobotModel

MODEL_FORMAT = "fastron-model"
MODEL_VERSION = 1


class NotTrainedError(RuntimeError):
    pass


@dataclass
class Dataset:
    """Configurations ``X`` (N, D) with labels ``y`` in {+1 (collision), -1 (free)}.

    Duplicate configurations are rejected: they make the Gram matrix singular.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.ascontiguousarray(np.atleast_2d(np.asarray(self.X, dtype=float)))
        self.y = np.asarray(self.y).astype(np.int64).ravel()
        if len(self.X) != len(self.y):
            raise ValueError(f"{len(self.X)} configurations but {len(self.y)} labels")
        if not np.all(np.isin(self.y, (-1, 1))):
            raise ValueError("labels must be +1 or -1")
        if len(np.unique(self.X, axis=0)) != len(self.X):
            raise ValueError("dataset contains duplicate configurations")

    def __len__(self):
        return len(self.y)

    @classmethod
    def unique(cls, X, y) -> "Dataset":
        """Build a dataset keeping only the first occurrence of each configuration."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        _, first = np.unique(X, axis=0, return_index=True)
        keep = np.sort(first)
        return cls(X[keep], np.asarray(y)[keep])


@dataclass(frozen=True)
class TrainParams:
    beta: float = 1.0
    iter_max: int = 5000
    s_max: int = 3000

    def __post_init__(self):
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        if self.iter_max < 1 or self.s_max < 1:
            raise ValueError("iter_max and s_max must be positive")


class FastronModel:
    """Weighted kernel expansion over a support set.

    ``score(x) = sum_i K(S_i, x) alpha_i``; positive scores predict collision.
    Zero scores (including the empty model) predict free space.
    """

    def __init__(self, support, alpha, labels, spec: KernelSpec, robot: RobotModel, *, trained=True):
        self.support = np.ascontiguousarray(np.asarray(support, dtype=float).reshape(-1, robot.dof))
        self.alpha = np.ascontiguousarray(alpha, dtype=float)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.spec = spec
        self.robot = robot
        self.trained = trained
        self.converged = True
        self.iterations = 0
        self.F = None
        self.history = None
        self.n_column_evals = 0
        # query-time layouts: (M, 3, S) control points or (D, S) joint features
        if spec.kind == FK:
            self._support_features = np.ascontiguousarray(robot_fk_points(robot, self.support).transpose(1, 2, 0))
        else:
            self._support_features = np.ascontiguousarray(robot.normalize(self.support).T)
        self._inv_range = 1.0 / robot.joint_range

    def __len__(self):
        return len(self.alpha)

    @property
    def n_support(self) -> int:
        return len(self.alpha)

    def _check(self):
        if not self.trained:
            raise NotTrainedError("model has not been trained")

    def score(self, x) -> float:
        self._check()
        q = np.ascontiguousarray(x, dtype=float)
        r = self.robot
        if self.spec.kind == FK:
            return _jit.score_fk_config(
                r.base_transform, r.dh_table, r.prismatic, r.cp_joint, r.cp_transform,
                self._support_features, self.alpha, self.spec.gamma, q,
            )
        return _jit.score_rq_config(r.lower, self._inv_range, self._support_features, self.alpha, self.spec.gamma, q)

    def scores(self, configs) -> np.ndarray:
        self._check()
        Q = np.ascontiguousarray(np.atleast_2d(configs), dtype=float)
        r = self.robot
        if self.spec.kind == FK:
            return _jit.score_fk_batch(
                r.base_transform, r.dh_table, r.prismatic, r.cp_joint, r.cp_transform,
                self._support_features, self.alpha, self.spec.gamma, Q,
            )
        return _jit.score_rq_batch(r.lower, self._inv_range, self._support_features, self.alpha, self.spec.gamma, Q)

    def query(self, x) -> tuple[int, float]:
        s = self.score(x)
        return (1 if s > 0 else -1), s

    def __call__(self, x) -> int:
        return 1 if self.score(x) > 0 else -1

    def predict(self, configs) -> np.ndarray:
        return np.where(self.scores(configs) > 0, 1, -1)

    def margin(self, x, y_true) -> float:
        return y_true * self.score(x)

    def __repr__(self):
        return f"FastronModel({self.spec.kind}, gamma={self.spec.gamma:g}, |S|={self.n_support})"

    # -- serialization

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "robot": self.robot.name,
            "kernel": {"kind": self.spec.kind, "gamma": self.spec.gamma},
            "converged": self.converged,
            "support": self.support.tolist(),
            "alpha": self.alpha.tolist(),
            "labels": self.labels.tolist(),
        }

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=1)

    @classmethod
    def from_dict(cls, data: dict, robot: RobotModel) -> "FastronModel":
        if data.get("format") != MODEL_FORMAT:
            raise ValueError("not a Fastron model file")
        if data.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {data.get('version')}")
        if data["robot"] != robot.name:
            raise ValueError(f"model was trained for robot {data['robot']!r}, not {robot.name!r}")
        k = data["kernel"]
        model = cls(data["support"], data["alpha"], data["labels"], KernelSpec(k["kind"], k["gamma"]), robot)
        model.converged = data.get("converged", True)
        return model

    @classmethod
    def load(cls, path, robot: RobotModel) -> "FastronModel":
        with open(path) as f:
            return cls.from_dict(json.load(f), robot)


def robot_fk_points(robot: RobotModel, configs) -> np.ndarray:
    Q = np.ascontiguousarray(np.asarray(configs, dtype=float).reshape(-1, robot.dof))
    return _jit.fk_points_batch(robot.base_transform, robot.dh_table, robot.prismatic, robot.cp_joint, robot.cp_transform, Q)


def empty_model(spec: KernelSpec, robot: RobotModel) -> FastronModel:
    return FastronModel(np.zeros((0, robot.dof)), np.zeros(0), np.zeros(0, dtype=np.int64), spec, robot)


def _warm_start(prior: FastronModel, dataset: Dataset) -> np.ndarray:
    """Prior weights for dataset rows that were prior support points, dropping
    any whose label no longer agrees with the weight's sign."""
    alpha = np.zeros(len(dataset))
    lookup = {row.tobytes(): a for row, a in zip(prior.support, prior.alpha)}
    for i, row in enumerate(dataset.X):
        a = lookup.get(row.tobytes())
        if a is not None and a * dataset.y[i] > 0:
            alpha[i] = a
    return alpha


def train(
    dataset: Dataset,
    params: TrainParams,
    spec: KernelSpec,
    robot: RobotModel,
    prior: FastronModel | None = None,
    record: bool = False,
) -> FastronModel:
    """Fit weights by greedy coordinate descent on the Fastron loss.

    Each iteration either corrects the sample with the lowest margin (if it is
    not positive), or drops the support point that keeps the highest margin
    without itself, or stops. Gram columns are computed only when a sample is
    touched. ``record=True`` keeps ``(step, index, delta)`` tuples in
    ``model.history`` ("add" steps change alpha_i by delta, "remove" steps
    zero it). Hitting ``iter_max`` or ``s_max`` with non-positive margins
    leaves ``model.converged`` False.
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    y = dataset.y.astype(float)
    b = params.beta ** (0.5 * (y + 1.0))
    target = b * y
    cache = GramCache(dataset.X, spec, robot)

    if prior is not None:
        alpha = _warm_start(prior, dataset)
    else:
        alpha = np.zeros(len(dataset))
    F = np.zeros(len(dataset))
    for i in np.flatnonzero(alpha):
        F += alpha[i] * cache.column(i)
    n_support = int(np.count_nonzero(alpha))
    history = [] if record else None

    iterations = 0
    for _ in range(params.iter_max):
        iterations += 1
        m = y * F
        i = int(np.argmin(m))
        if m[i] <= 0 and (n_support < params.s_max or alpha[i] != 0):
            col = cache.column(i)
            delta = target[i] - F[i]
            if alpha[i] == 0:
                n_support += 1
            alpha[i] += delta
            F += delta * col
            if record:
                history.append(("add", i, delta))
            continue
        sup = np.flatnonzero(alpha)
        if len(sup):
            after = y[sup] * (F[sup] - alpha[sup])
            j = int(np.argmax(after))
            if after[j] > 0:
                i = int(sup[j])
                F -= alpha[i] * cache.column(i)
                if record:
                    history.append(("remove", i, -alpha[i]))
                alpha[i] = 0.0
                n_support -= 1
                continue
        iterations -= 1
        break

    sup = np.flatnonzero(alpha)
    model = FastronModel(dataset.X[sup], alpha[sup], dataset.y[sup], spec, robot)
    model.converged = bool(np.all(y * F > 0))
    model.iterations = iterations
    model.F = F[sup]
    model.history = history
    model.n_column_evals = cache.n_column_evals
    model.min_train_margin = float(np.min(y * F))
    return model


def loss(alpha, K, y, beta: float = 1.0) -> float:
    """Fastron objective ``0.5 a^T K a - y^T B a`` (dense; for audits)."""
    y = np.asarray(y, dtype=float)
    b = beta ** (0.5 * (y + 1.0))
    return float(0.5 * alpha @ K @ alpha - (y * b) @ alpha)


@dataclass(frozen=True)
class ActiveLearningCounts:
    near: int
    uniform: int


def default_counts(model: FastronModel, dataset_size: int) -> ActiveLearningCounts:
    """Two near samples per support point, then uniform samples to keep the
    dataset near ``dataset_size``."""
    s = model.n_support
    return ActiveLearningCounts(2 * s, max(0, dataset_size - 3 * s))


def default_sigma(robot: RobotModel) -> np.ndarray:
    return 0.05 * robot.joint_range


def gaussian_perturbation(rng, centers, sigma):
    return centers + rng.standard_normal(centers.shape) * sigma


def _label(oracle, X) -> np.ndarray:
    if hasattr(oracle, "labels"):
        return np.asarray(oracle.labels(X))
    return np.array([oracle(x) for x in X], dtype=np.int64)


def active_learning_step(
    model: FastronModel,
    oracle,
    counts: ActiveLearningCounts,
    sigma,
    rng: np.random.Generator,
    perturb=gaussian_perturbation,
) -> Dataset:
    """Fresh labeled dataset: the support set plus samples perturbed around
    support points and samples drawn uniformly over the joint limits, all
    labeled by ``oracle``. Previous non-support samples are discarded."""
    robot = model.robot
    S = model.support
    parts = [S]
    if counts.near > 0 and len(S):
        reps, extra = divmod(counts.near, len(S))
        idx = np.concatenate([np.tile(np.arange(len(S)), reps), rng.choice(len(S), extra, replace=False)])
        parts.append(robot.clamp(perturb(rng, S[idx], np.asarray(sigma, dtype=float))))
    if counts.uniform > 0:
        parts.append(robot.sample(rng, counts.uniform))
    X = np.concatenate(parts)
    _, first = np.unique(X, axis=0, return_index=True)
    X = X[np.sort(first)]
    return Dataset(X, _label(oracle, X))


def update_cycle(
    model: FastronModel,
    oracle,
    params: TrainParams,
    rng: np.random.Generator,
    dataset_size: int,
    counts: ActiveLearningCounts | None = None,
    sigma=None,
) -> FastronModel:
    """Resample with active learning against the current scene, then retrain
    starting from ``model``."""
    if counts is None:
        counts = default_counts(model, dataset_size)
    if sigma is None:
        sigma = default_sigma(model.robot)
    data = active_learning_step(model, oracle, counts, sigma, rng)
    return train(data, params, model.spec, model.robot, prior=model)
