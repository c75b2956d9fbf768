"""Command-line entry point: ``fastron-bench <subcommand> --config FILE``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import yaml

from fastron_fk.bench import report
from fastron_fk.bench.image import export_cspace_image
from fastron_fk.bench.runners import (
    run_collision_benchmark,
    run_obstacle_sweep,
    run_planning_benchmark,
    trial_rngs,
    unique_samples,
)
from fastron_fk.bench.scenario import FASTRON_FK, FASTRON_RQ, load_scenario
from fastron_fk.fastron import Dataset, FastronModel, train
from fastron_fk.geometry import CollisionOracle, grid_ground_truth


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fastron-bench", description="Fastron proxy collision-checking benchmarks")
    sub = p.add_subparsers(dest="command", metavar="command")

    def add(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="scenario file (or name of a shipped scenario)")
        s.add_argument("--seed", type=int, help="override the master seed")
        s.add_argument("--out", default=".", help="output directory (default: current)")
        s.add_argument("--robot", help="override the scenario's robot file")
        s.add_argument("--trials", type=int, help="override the trial count")
        return s

    add("collision-bench", "accuracy, support size and query time per checker (writes metrics.csv)")
    add("obstacle-sweep", "query time against obstacle count (writes sweep.csv)")
    add("planning-bench", "planning time and path length per planner and checker (writes planning.csv)")
    add("cspace-image", "ground-truth C-space with FK model overlay (writes cspace.ppm)")
    t = add("train", "train a Fastron model on the scenario's first scene (writes model.json)")
    t.add_argument("--kernel", choices=("fk", "rq"), default="fk")
    q = add("query", "query a saved model")
    q.add_argument("--model", required=True, help="model file written by 'train'")
    q.add_argument("configs", nargs="+", help="configurations as comma-separated joint values")
    return p


def _first_scene(config):
    robot = config.robot()
    rng = trial_rngs(config.seed, 1)[0]
    scene = config.scene_spec().build(rng)
    return robot, scene, rng


def _train_first(config, checker):
    robot, scene, rng = _first_scene(config)
    oracle = CollisionOracle(robot, scene)
    X = unique_samples(robot, rng, config.dataset_size)
    model = train(Dataset(X, oracle.labels(X)), config.train, config.kernel(checker), robot)
    return robot, scene, model


def _run(args) -> int:
    config = load_scenario(args.config).with_overrides(seed=args.seed, trials=args.trials, robot=args.robot)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cmd = args.command
    if cmd == "collision-bench":
        print(report.collision_outputs(run_collision_benchmark(config), out))
    elif cmd == "obstacle-sweep":
        print(report.sweep_outputs(run_obstacle_sweep(config), out))
    elif cmd == "planning-bench":
        print(report.planning_outputs(run_planning_benchmark(config), out))
    elif cmd == "cspace-image":
        robot, scene, model = _train_first(config, FASTRON_FK)
        grid = grid_ground_truth(robot, scene, config.image_resolution)
        slice_index = None
        if robot.dof == 3:
            axis = np.linspace(robot.lower[2], robot.upper[2], config.image_resolution)
            slice_index = int(np.argmin(np.abs(axis - config.image_slice)))
        img = export_cspace_image(grid, out / "cspace.ppm", model, slice_index)
        print(f"wrote {out / 'cspace.ppm'}: {img.pixels.shape[1]}x{img.pixels.shape[0]}, "
              f"|S| = {model.n_support}, mismatch fraction = {img.mismatch_fraction:.4f}")
    elif cmd == "train":
        checker = FASTRON_FK if args.kernel == "fk" else FASTRON_RQ
        _, _, model = _train_first(config, checker)
        model.save(out / "model.json")
        print(f"wrote {out / 'model.json'}: {model!r}, converged = {model.converged}")
    elif cmd == "query":
        model = FastronModel.load(args.model, config.robot())
        for text in args.configs:
            q = np.array([float(v) for v in text.split(",")])
            if len(q) != model.robot.dof:
                raise ValueError(f"configuration {text!r} has {len(q)} values, robot has {model.robot.dof} joints")
            label, score = model.query(q)
            print(f"{text}\t{'collision' if label > 0 else 'free'}\t{score!r}")
    return 0


def main(argv=None) -> int:
    parser = _parser()
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return _run(args)
    except (OSError, ValueError, KeyError, yaml.YAMLError, RuntimeError) as err:
        print(f"fastron-bench: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
