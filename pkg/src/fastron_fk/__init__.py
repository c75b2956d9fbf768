"""Proxy collision checking for serial manipulators with the Fastron kernel
perceptron and a forward-kinematics kernel."""

from fastron_fk.fastron import Dataset, FastronModel, TrainParams, train, update_cycle
from fastron_fk.kernels import FK, RQ, KernelSpec, fk_kernel, rq_kernel
from fastron_fk.kinematics import DHParams, RobotModel, control_point_positions, load_robot

__version__ = "0.1.0"

__all__ = [
    "DHParams",
    "Dataset",
    "FK",
    "FastronModel",
    "KernelSpec",
    "RQ",
    "RobotModel",
    "TrainParams",
    "control_point_positions",
    "fk_kernel",
    "load_robot",
    "rq_kernel",
    "train",
    "update_cycle",
]
