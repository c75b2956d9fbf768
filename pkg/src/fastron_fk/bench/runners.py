"""Experiment runners: moving-obstacle collision benchmark, obstacle-count
sweep and planning comparison.

Every result that depends only on (config, seed) goes in ``rows``; wall-clock
measurements go in ``timing`` so the former can be compared byte for byte
across runs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from fastron_fk.bench.metrics import MetricsReport, compute_metrics, mean_std
from fastron_fk.bench.scenario import FASTRON_FK, FASTRON_RQ, ORACLE, ScenarioConfig
from fastron_fk.fastron import Dataset, FastronModel, train, update_cycle
from fastron_fk.geometry import CollisionOracle, Scene, Sphere, grid_configs
from fastron_fk.planners import (
    PlanningError,
    invalid_stretches,
    path_valid,
    plan,
    repair,
)

FASTRON = (FASTRON_FK, FASTRON_RQ)


def trial_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Independent generator per trial, derived from the master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def time_queries(fn, Q: np.ndarray, warmup: int) -> float:
    """Mean microseconds per query of the batch function ``fn`` over ``Q``
    after a warmup pass on its first ``warmup`` rows."""
    if warmup:
        fn(Q[:warmup])
    t0 = time.perf_counter()
    fn(Q)
    return (time.perf_counter() - t0) / len(Q) * 1e6


def unique_samples(robot, rng, n: int) -> np.ndarray:
    X = robot.sample(rng, n)
    _, first = np.unique(X, axis=0, return_index=True)
    return X[np.sort(first)]


def _batch_fn(checker: str, models: dict, oracle: CollisionOracle):
    return oracle.labels if checker == ORACLE else models[checker].scores


@dataclass
class CollisionResult:
    rows: list = field(default_factory=list)  # one dict per (trial, checker)
    timing: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)  # checker -> MetricsReport

    def per_trial(self, checker: str, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows if r["checker"] == checker], dtype=float)

    def per_trial_timing(self, checker: str, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.timing if r["checker"] == checker], dtype=float)


def _test_set(config: ScenarioConfig, robot) -> np.ndarray | None:
    """Fixed grid test configurations, or None for fresh uniform samples."""
    if config.test_grid:
        return grid_configs(robot, config.test_grid)
    return None


def run_collision_benchmark(config: ScenarioConfig) -> CollisionResult:
    """Per trial: build the scene, train each Fastron checker on N oracle-labeled
    samples, then for every obstacle move run the update cycle and score all
    checkers on a fresh oracle-labeled test set. A static scene (``moves: 0``)
    is evaluated once after training."""
    robot = config.robot()
    spec = config.scene_spec()
    fastron = [c for c in config.checkers if c in FASTRON]
    result = CollisionResult()
    for trial, rng in enumerate(trial_rngs(config.seed, config.trials)):
        timing_rng = np.random.default_rng(rng.integers(2**63))
        scene = spec.build(rng)
        oracle = CollisionOracle(robot, scene)
        X = unique_samples(robot, rng, config.dataset_size)
        data = Dataset(X, oracle.labels(X))
        models = {c: train(data, config.train, config.kernel(c), robot) for c in fastron}
        counts = {c: MetricsReport(0, 0, 0, 0) for c in config.checkers}
        support = {c: [] for c in fastron}
        converged = {c: [] for c in fastron}
        update_ms = {c: [] for c in fastron}
        fixed_test = _test_set(config, robot)

        if config.moves and spec.motion is not None:
            steps = spec.motion.displacements(len(scene.obstacles), rng)[: config.moves]
        else:
            steps = [None]
        for dv in steps:
            if dv is not None:
                scene = scene.moved(dv)
                oracle = CollisionOracle(robot, scene)
                for c in fastron:
                    t0 = time.perf_counter()
                    models[c] = update_cycle(models[c], oracle, config.train, rng, config.dataset_size)
                    update_ms[c].append((time.perf_counter() - t0) * 1e3)
            Xt = fixed_test if fixed_test is not None else robot.sample(rng, config.test_size)
            yt = oracle.labels(Xt)
            for c in config.checkers:
                pred = yt if c == ORACLE else models[c].predict(Xt)
                counts[c] = counts[c] + compute_metrics(pred, yt)
            for c in fastron:
                support[c].append(models[c].n_support)
                converged[c].append(models[c].converged)

        Q = robot.sample(timing_rng, config.timing_queries + config.timing_warmup)
        for c in config.checkers:
            m = counts[c]
            row = dict(trial=trial, checker=c, tp=m.tp, fp=m.fp, tn=m.tn, fn=m.fn,
                       accuracy=m.accuracy, tpr=m.tpr, tnr=m.tnr)
            if c in fastron:
                row.update(support_mean=float(np.mean(support[c])), converged_fraction=float(np.mean(converged[c])))
            else:
                row.update(support_mean=None, converged_fraction=None)
            result.rows.append(row)
            fn = _batch_fn(c, models, oracle)
            fn(Q[: config.timing_warmup])
            result.timing.append(dict(
                trial=trial, checker=c,
                query_us=time_queries(fn, Q[config.timing_warmup:], 0),
                update_ms=float(np.mean(update_ms[c])) if c in fastron and update_ms[c] else None,
            ))

    for c in config.checkers:
        total = MetricsReport(0, 0, 0, 0)
        for r in result.rows:
            if r["checker"] == c:
                total = total + MetricsReport(r["tp"], r["fp"], r["tn"], r["fn"])
        upd = [t["update_ms"] for t in result.timing if t["checker"] == c and t["update_ms"] is not None]
        result.summary[c] = MetricsReport(
            total.tp, total.fp, total.tn, total.fn,
            query_time_us=mean_std(result.per_trial_timing(c, "query_us")),
            support_count=mean_std(result.per_trial(c, "support_mean")) if c in fastron else None,
            update_time_ms=mean_std(upd) if upd else None,
        )
    return result


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)  # one dict per (trial, count, checker)
    timing: list = field(default_factory=list)

    def medians(self, checker: str, key: str, source: str = "timing") -> tuple[list, list]:
        """(counts, median of ``key`` across trials) for one checker."""
        table = self.timing if source == "timing" else self.rows
        counts = sorted({r["count"] for r in table})
        med = [float(np.median([r[key] for r in table if r["checker"] == checker and r["count"] == n])) for n in counts]
        return counts, med


def sweep_scene(config: ScenarioConfig, bounds: np.ndarray, count: int, rng) -> Scene:
    """``count`` spheres of the configured radius, centers uniform in the
    sweep region (the scene bounds if none is given)."""
    region = config.sweep.region if config.sweep.region is not None else bounds
    centers = rng.uniform(region[0], region[1], size=(count, 3))
    return Scene([Sphere(c, config.sweep.radius) for c in centers], bounds)


def run_obstacle_sweep(config: ScenarioConfig, counts=None) -> SweepResult:
    """Query time of every checker against the number of obstacles.

    For each trial and count a fresh random scene is built, the Fastron
    checkers are trained on N oracle-labeled samples, and every checker is
    timed on a query set shared by all counts of that trial.
    """
    counts = list(config.sweep.counts if counts is None else counts)
    if counts != sorted(counts) or (counts and counts[-1] > 50):
        raise ValueError("obstacle counts must be ascending and at most 50")
    robot = config.robot()
    bounds = config.scene_spec().bounds
    fastron = [c for c in config.checkers if c in FASTRON]
    result = SweepResult()
    for trial, rng in enumerate(trial_rngs(config.seed, config.trials)):
        timing_rng = np.random.default_rng(rng.integers(2**63))
        Q = robot.sample(timing_rng, config.timing_queries + config.timing_warmup)
        for n in counts:
            scene = sweep_scene(config, bounds, n, rng)
            oracle = CollisionOracle(robot, scene)
            X = unique_samples(robot, rng, config.dataset_size)
            y = oracle.labels(X)
            models = {c: train(Dataset(X, y), config.train, config.kernel(c), robot) for c in fastron}
            for c in config.checkers:
                result.rows.append(dict(
                    trial=trial, count=n, checker=c,
                    support=models[c].n_support if c in fastron else None,
                    converged=models[c].converged if c in fastron else None,
                    collision_fraction=float(np.mean(y > 0)),
                ))
                fn = _batch_fn(c, models, oracle)
                fn(Q[: config.timing_warmup])
                us = time_queries(fn, Q[config.timing_warmup:], 0)
                result.timing.append(dict(trial=trial, count=n, checker=c, query_us=us,
                                          support=models[c].n_support if c in fastron else None))
    return result


@dataclass
class PlanningResult:
    rows: list = field(default_factory=list)  # one dict per (trial, position, planner, checker)
    timing: list = field(default_factory=list)

    def totals(self, planner: str, checker: str) -> np.ndarray:
        return np.array([t["total_ms"] for t in self.timing if t["planner"] == planner and t["checker"] == checker])


def _checker_fn(c: str, models: dict, oracle: CollisionOracle):
    return oracle if c == ORACLE else models[c]


def run_planning_benchmark(config: ScenarioConfig) -> PlanningResult:
    """Per trial and obstacle position, plan from start to goal with every
    (planner, checker) pair. Proxy plans are verified edge by edge with the
    oracle and any invalid stretches are replanned with it; oracle plans need
    neither step and report zero verify and repair time."""
    if config.start is None or config.goal is None:
        raise ValueError("planning benchmark needs planning.start and planning.goal")
    robot = config.robot()
    spec = config.scene_spec()
    params = config.planner_params(robot)
    limits = robot.joint_limits
    fastron = [c for c in config.checkers if c in FASTRON]
    result = PlanningResult()
    for trial, rng in enumerate(trial_rngs(config.seed, config.trials)):
        scene = spec.build(rng)
        oracle = CollisionOracle(robot, scene)
        X = unique_samples(robot, rng, config.dataset_size)
        data = Dataset(X, oracle.labels(X))
        models: dict[str, FastronModel] = {c: train(data, config.train, config.kernel(c), robot) for c in fastron}
        steps = spec.motion.displacements(len(scene.obstacles), rng) if spec.motion is not None else None
        for pos in range(config.positions):
            if pos > 0:
                if steps is None or pos - 1 >= len(steps):
                    raise ValueError("scene motion script has fewer steps than planning positions")
                scene = scene.moved(steps[pos - 1])
                oracle = CollisionOracle(robot, scene)
                models = {c: update_cycle(m, oracle, config.train, rng, config.dataset_size) for c, m in models.items()}
            for c in config.checkers:
                # first call loads compiled code; keep it out of the timings
                _checker_fn(c, models, oracle)(config.start)
            for k, kind in enumerate(config.planners):
                seed = int(np.random.SeedSequence([config.seed, trial, pos, k]).generate_state(1)[0])
                pp = params.with_seed(seed)
                for c in config.checkers:
                    row = dict(trial=trial, position=pos, planner=kind, checker=c, success=False,
                               initial_length=None, final_length=None, repaired=0, final_valid=False, error="")
                    t_plan = t_verify = t_repair = 0.0
                    try:
                        t0 = time.perf_counter()
                        path = plan(kind, _checker_fn(c, models, oracle), config.start, config.goal, pp, limits)
                        t_plan = time.perf_counter() - t0
                        row["initial_length"] = path.length
                        if c != ORACLE:
                            t0 = time.perf_counter()
                            stretches = invalid_stretches(path, oracle, pp.resolution)
                            t_verify = time.perf_counter() - t0
                            if stretches:
                                t0 = time.perf_counter()
                                path = repair(path, stretches, kind, pp, oracle, limits)
                                t_repair = time.perf_counter() - t0
                            row["repaired"] = len(stretches)
                        row["success"] = True
                        row["final_length"] = path.length
                        row["final_valid"] = path_valid(path, oracle, pp.resolution)
                    except PlanningError as err:
                        row["error"] = type(err).__name__
                    result.rows.append(row)
                    result.timing.append(dict(
                        trial=trial, position=pos, planner=kind, checker=c,
                        plan_ms=t_plan * 1e3, verify_ms=t_verify * 1e3, repair_ms=t_repair * 1e3,
                        total_ms=(t_plan + t_verify + t_repair) * 1e3,
                    ))
    return result
