"""CSV files and aligned text tables for benchmark results."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from fastron_fk.bench.metrics import fmt
from fastron_fk.bench.runners import CollisionResult, PlanningResult, SweepResult


def write_csv(path, rows: list[dict]):
    path = Path(path)
    with open(path, "w", newline="") as f:
        if not rows:
            return
        w = csv.writer(f, lineterminator="\n")
        w.writerow(list(rows[0]))
        for r in rows:
            w.writerow([fmt(v) for v in r.values()])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def text_table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[c if isinstance(c, str) else _short(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _short(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, tuple):
        return f"{v[0]:.4g} ± {v[1]:.2g}"
    return str(v)


def collision_outputs(result: CollisionResult, out: Path) -> str:
    write_csv(out / "metrics.csv", result.rows)
    write_csv(out / "metrics_timing.csv", result.timing)
    rows = []
    for c, m in result.summary.items():
        rows.append([c, m.query_time_us, m.support_count, m.update_time_ms, m.accuracy, m.tpr, m.tnr])
    return text_table(["checker", "query µs", "|S|", "update ms", "accuracy", "TPR", "TNR"], rows)


def sweep_outputs(result: SweepResult, out: Path) -> str:
    write_csv(out / "sweep.csv", result.rows)
    write_csv(out / "sweep_timing.csv", result.timing)
    checkers = list(dict.fromkeys(r["checker"] for r in result.timing))
    counts = sorted({r["count"] for r in result.timing})
    rows = []
    for c in checkers:
        _, med = result.medians(c, "query_us")
        for n, t in zip(counts, med):
            sup = [r["support"] for r in result.rows if r["checker"] == c and r["count"] == n]
            rows.append([c, str(n), t, None if sup[0] is None else float(sum(sup)) / len(sup)])
    return text_table(["checker", "obstacles", "median query µs", "mean |S|"], rows)


def planning_outputs(result: PlanningResult, out: Path) -> str:
    write_csv(out / "planning.csv", result.rows)
    write_csv(out / "planning_timing.csv", result.timing)
    rows = []
    pairs = list(dict.fromkeys((r["planner"], r["checker"]) for r in result.rows))
    for p, c in pairs:
        sel = [r for r in result.rows if r["planner"] == p and r["checker"] == c]
        tim = [t for t in result.timing if t["planner"] == p and t["checker"] == c]
        lengths = [r["initial_length"] for r in sel if r["initial_length"] is not None]
        rows.append([
            p, c, f"{sum(r['success'] for r in sel)}/{len(sel)}",
            float(np.median([t["total_ms"] for t in tim])),
            float(np.median([t["plan_ms"] for t in tim])),
            float(np.median([t["verify_ms"] + t["repair_ms"] for t in tim])),
            float(np.mean(lengths)) if lengths else None,
        ])
    return text_table(["planner", "checker", "success", "median total ms", "plan ms", "verify+repair ms", "mean length"], rows)
