"""Confusion counts and the accuracy / TPR / TNR ratios derived from them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNDEFINED = "undefined"


def _ratio(num: int, den: int):
    return num / den if den else None


@dataclass(frozen=True)
class MetricsReport:
    """Counts with +1 = collision as the positive class.

    Ratios with a zero denominator are ``None`` (written as ``undefined``).
    The timing and support-size fields are (mean, stddev) pairs filled in by
    the benchmarks; they stay ``None`` for a bare comparison.
    """

    tp: int
    fp: int
    tn: int
    fn: int
    query_time_us: tuple | None = None
    support_count: tuple | None = None
    update_time_ms: tuple | None = None

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self):
        return _ratio(self.tp + self.tn, self.total)

    @property
    def tpr(self):
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def tnr(self):
        return _ratio(self.tn, self.tn + self.fp)

    def __add__(self, other: "MetricsReport") -> "MetricsReport":
        return MetricsReport(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)


def compute_metrics(predictions, truths) -> MetricsReport:
    p = np.asarray(predictions).ravel()
    t = np.asarray(truths).ravel()
    if len(p) != len(t):
        raise ValueError(f"{len(p)} predictions but {len(t)} truths")
    pos_p, pos_t = p > 0, t > 0
    return MetricsReport(
        tp=int(np.sum(pos_p & pos_t)),
        fp=int(np.sum(pos_p & ~pos_t)),
        tn=int(np.sum(~pos_p & ~pos_t)),
        fn=int(np.sum(~pos_p & pos_t)),
    )


def fmt(value) -> str:
    """CSV cell text: exact float repr, ``undefined`` for missing ratios."""
    if value is None:
        return UNDEFINED
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def mean_std(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        return (float("nan"), float("nan"))
    return float(v.mean()), float(v.std())
