"""Least-squares recovery of the creation and execution cost curves.

Creation cost is fit linearly against batch size; execution time is fit
linearly against 1/batch_size. Both fits run on per-point sample means
with closed-form centered normal equations.
"""

from __future__ import annotations

import operator
import statistics
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "MeasurementPoint",
    "MeasurementSeries",
    "FitKind",
    "FitResult",
    "fit_creation",
    "fit_execution",
    "fit_validity_filter",
]


@dataclass(frozen=True)
class MeasurementPoint:
    """Repeated wall-clock samples for one batch size."""

    batch_size: int
    samples: tuple[float, ...]

    def __post_init__(self):
        size = operator.index(self.batch_size)
        if size < 1:
            raise ValueError(f"batch_size must be positive, got {size}")
        object.__setattr__(self, "batch_size", size)
        samples = tuple(float(s) for s in self.samples)
        if not samples:
            raise ValueError("a measurement point needs at least one sample")
        for s in samples:
            if not s > 0.0:
                raise ValueError(f"samples must be positive, got {s!r}")
        object.__setattr__(self, "samples", samples)

    def mean(self) -> float:
        return statistics.fmean(self.samples)


@dataclass(frozen=True)
class MeasurementSeries:
    points: tuple[MeasurementPoint, ...]
    label: str = ""

    def __post_init__(self):
        points = tuple(self.points)
        if not points:
            raise ValueError("a measurement series needs at least one point")
        object.__setattr__(self, "points", points)

    def batch_sizes(self) -> tuple[int, ...]:
        return tuple(p.batch_size for p in self.points)


class FitKind(Enum):
    CREATION = "creation"
    EXECUTION = "execution"


@dataclass(frozen=True)
class FitResult:
    kind: FitKind
    slope: float
    intercept: float
    mae: float
    points_used: int


def _ols_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    # centered normal equations: exact to rounding on noiseless collinear data
    x_mean = x.mean()
    y_mean = y.mean()
    dx = x - x_mean
    denom = float(dx @ dx)
    if denom == 0.0:
        raise ValueError("need at least 2 distinct batch sizes to fit a line")
    slope = float(dx @ (y - y_mean)) / denom
    return slope, float(y_mean - slope * x_mean)


def _fit(series: MeasurementSeries, kind: FitKind) -> FitResult:
    if len(set(series.batch_sizes())) < 2:
        raise ValueError("need at least 2 distinct batch sizes to fit a line")
    sizes = np.array([p.batch_size for p in series.points], dtype=float)
    means = np.array([p.mean() for p in series.points], dtype=float)
    x = sizes if kind is FitKind.CREATION else 1.0 / sizes
    slope, intercept = _ols_line(x, means)
    mae = float(np.mean(np.abs(means - (slope * x + intercept))))
    return FitResult(kind, slope, intercept, mae, len(series.points))


def fit_creation(series: MeasurementSeries) -> FitResult:
    """Per-node slope and fixed base of the chain build cost."""
    return _fit(series, FitKind.CREATION)


def fit_execution(series: MeasurementSeries) -> FitResult:
    """Slope against 1/batch_size and asymptotic floor of the execution time."""
    return _fit(series, FitKind.EXECUTION)


def fit_validity_filter(
    series: MeasurementSeries, max_fraction: float, total_kernel_executions: int
) -> MeasurementSeries:
    """Drop points whose batch size exceeds max_fraction of the kernel count.

    Large batches leave too few launches for the reciprocal shape to hold,
    so they are excluded before fitting.
    """
    if not 0.0 < max_fraction <= 1.0:
        raise ValueError(f"max_fraction must be in (0, 1], got {max_fraction!r}")
    total = operator.index(total_kernel_executions)
    if total < 1:
        raise ValueError("total_kernel_executions must be >= 1")
    bound = max_fraction * total
    kept = tuple(p for p in series.points if p.batch_size <= bound)
    if len({p.batch_size for p in kept}) < 2:
        raise ValueError(
            "validity filter left fewer than 2 distinct batch sizes "
            f"(bound {bound:g}, kept {len(kept)} of {len(series.points)} points)"
        )
    return MeasurementSeries(kept, series.label)
