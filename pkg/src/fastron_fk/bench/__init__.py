from fastron_fk.bench.image import export_cspace_image, read_ppm, render_cspace
from fastron_fk.bench.metrics import UNDEFINED, MetricsReport, compute_metrics
from fastron_fk.bench.runners import run_collision_benchmark, run_obstacle_sweep, run_planning_benchmark
from fastron_fk.bench.scenario import ScenarioConfig, load_scenario, scenario_from_dict

__all__ = [
    "MetricsReport",
    "ScenarioConfig",
    "UNDEFINED",
    "compute_metrics",
    "export_cspace_image",
    "load_scenario",
    "read_ppm",
    "render_cspace",
    "run_collision_benchmark",
    "run_obstacle_sweep",
    "run_planning_benchmark",
    "scenario_from_dict",
]
