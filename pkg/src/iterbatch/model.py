"""Analytic timing model for iteration-batched kernel launches.

A run of ``total_kernel_executions`` identical kernel launches is grouped
into ``num_batches`` launches of a linear chain of ``batch_size`` kernels.
Building a chain costs time linear in its node count; executing the run
pays one first-launch latency, a small gap between kernels inside a chain,
and a larger gap between chain launches. All times are seconds.
"""

from __future__ import annotations

import math
import operator
import statistics
from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "TimingParameters",
    "BatchPlan",
    "ReciprocalCoefficients",
    "MemoryModel",
    "SampleStats",
    "SpeedupEstimate",
    "creation_time",
    "execution_time_expanded",
    "execution_time_closed",
    "total_time",
    "reciprocal_coefficients",
    "baseline_time",
    "model_speedup",
    "measured_speedup",
    "continuous_optimal_batch",
    "memory_usage",
]

_TIMING_FIELDS = (
    "kernel_time",
    "intra_graph_gap",
    "inter_graph_gap",
    "first_launch_latency",
    "creation_per_node",
    "creation_base",
    "baseline_gap",
)


@dataclass(frozen=True)
class TimingParameters:
    """Platform timing constants.

    ``baseline_gap`` is the kernel-to-kernel gap of the plain launch loop;
    when omitted it defaults to ``inter_graph_gap``, i.e. switching between
    consecutive launches is assumed to cost the same whether the launched
    unit is a chain or a single kernel. No ordering between the two gap
    parameters is assumed anywhere.
    """

    kernel_time: float
    intra_graph_gap: float
    inter_graph_gap: float
    first_launch_latency: float
    creation_per_node: float = 0.0
    creation_base: float = 0.0
    baseline_gap: float | None = None

    def __post_init__(self):
        if self.baseline_gap is None:
            object.__setattr__(self, "baseline_gap", self.inter_graph_gap)
        for name in _TIMING_FIELDS:
            value = float(getattr(self, name))
            if not value >= 0.0:  # also rejects NaN
                raise ValueError(f"{name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class BatchPlan:
    """A factorization of the total kernel count into equal launch batches."""

    total_kernel_executions: int
    batch_size: int
    num_batches: int

    def __post_init__(self):
        for name in ("total_kernel_executions", "batch_size", "num_batches"):
            value = operator.index(getattr(self, name))
            if value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")
            object.__setattr__(self, name, value)
        if self.batch_size * self.num_batches != self.total_kernel_executions:
            raise ValueError(
                f"batch_size ({self.batch_size}) * num_batches ({self.num_batches}) "
                f"!= total_kernel_executions ({self.total_kernel_executions})"
            )

    @classmethod
    def from_batch_size(cls, total_kernel_executions: int, batch_size: int) -> "BatchPlan":
        """Plan for a batch size that must divide the total kernel count."""
        total = operator.index(total_kernel_executions)
        size = operator.index(batch_size)
        if total < 1 or size < 1:
            raise ValueError("total_kernel_executions and batch_size must be positive")
        num, rem = divmod(total, size)
        if rem:
            raise ValueError(
                f"batch size {size} does not divide total kernel count {total}"
            )
        return cls(total, size, num)


@dataclass(frozen=True)
class ReciprocalCoefficients:
    """Execution time reduced to ``slope / batch_size + intercept``.

    The slope carries the entire batching benefit (total kernel count times
    the excess of the between-batch gap over the in-chain gap); the intercept
    is the floor the execution time approaches as batches grow.
    """

    slope: float
    intercept: float

    def execution_time(self, batch_size: int) -> float:
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        return self.slope / batch_size + self.intercept


@dataclass(frozen=True)
class MemoryModel:
    """Device bytes consumed by one built chain, affine in its node count."""

    base_bytes: int
    bytes_per_node: int

    def __post_init__(self):
        for name in ("base_bytes", "bytes_per_node"):
            value = operator.index(getattr(self, name))
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class SampleStats:
    """Mean and sample standard deviation of repeated measurements."""

    mean: float
    std_dev: float
    n: int

    def __post_init__(self):
        n = operator.index(self.n)
        object.__setattr__(self, "n", n)
        if n < 1:
            raise ValueError("n must be >= 1")
        if not self.std_dev >= 0.0:
            raise ValueError(f"std_dev must be >= 0, got {self.std_dev!r}")
        if n == 1 and self.std_dev != 0.0:
            raise ValueError("a single sample has zero spread")

    @classmethod
    def from_samples(cls, samples) -> "SampleStats":
        xs = [float(x) for x in samples]
        if not xs:
            raise ValueError("need at least one sample")
        mean = statistics.fmean(xs)
        # n-1 denominator; a single sample has zero spread
        std = statistics.stdev(xs) if len(xs) > 1 else 0.0
        return cls(mean, std, len(xs))


class SpeedupEstimate(NamedTuple):
    ratio: float
    error: float


def _positive_count(value, name: str) -> int:
    count = operator.index(value)
    if count < 1:
        raise ValueError(f"{name} must be >= 1, got {count}")
    return count


def creation_time(params: TimingParameters, batch_size: int) -> float:
    """Cost of building one chain with ``batch_size`` nodes."""
    size = _positive_count(batch_size, "batch_size")
    return params.creation_per_node * size + params.creation_base


def execution_time_expanded(params: TimingParameters, plan: BatchPlan) -> float:
    """Launch latency, per-batch chain time, and between-batch gaps, term by term."""
    size, num = plan.batch_size, plan.num_batches
    chain = params.kernel_time * size + params.intra_graph_gap * (size - 1)
    return (
        params.first_launch_latency
        + chain * num
        + params.inter_graph_gap * (num - 1)
    )


def reciprocal_coefficients(
    params: TimingParameters, total_kernel_executions: int
) -> ReciprocalCoefficients:
    """Collapse the execution model to its slope/intercept form in 1/batch_size."""
    total = _positive_count(total_kernel_executions, "total_kernel_executions")
    slope = total * (params.inter_graph_gap - params.intra_graph_gap)
    intercept = (
        total * (params.kernel_time + params.intra_graph_gap)
        - params.inter_graph_gap
        + params.first_launch_latency
    )
    return ReciprocalCoefficients(slope, intercept)


def execution_time_closed(params: TimingParameters, plan: BatchPlan) -> float:
    """Same total as the expanded form, rearranged to slope/batch_size + intercept."""
    coeffs = reciprocal_coefficients(params, plan.total_kernel_executions)
    return coeffs.execution_time(plan.batch_size)


def total_time(params: TimingParameters, plan: BatchPlan) -> float:
    """Chain build cost plus execution time for the whole plan."""
    return creation_time(params, plan.batch_size) + execution_time_closed(params, plan)


def baseline_time(params: TimingParameters, total_kernel_executions: int) -> float:
    """Plain loop: one first-launch latency, then kernels separated by baseline_gap."""
    total = _positive_count(total_kernel_executions, "total_kernel_executions")
    return (
        params.first_launch_latency
        + total * params.kernel_time
        + (total - 1) * params.baseline_gap
    )


def model_speedup(params: TimingParameters, plan: BatchPlan) -> float:
    """Predicted baseline-over-batched time ratio.

    Raises ZeroDivisionError when the batched total is zero (all-zero
    parameters), matching plain float division.
    """
    return baseline_time(params, plan.total_kernel_executions) / total_time(params, plan)


def measured_speedup(baseline: SampleStats, graph: SampleStats) -> SpeedupEstimate:
    """Ratio of mean times, relative errors of both sides added in quadrature."""
    if baseline.mean <= 0.0 or graph.mean <= 0.0:
        raise ValueError("measured means must be positive")
    ratio = baseline.mean / graph.mean
    relative = math.hypot(baseline.std_dev / baseline.mean, graph.std_dev / graph.mean)
    return SpeedupEstimate(ratio, ratio * relative)


def continuous_optimal_batch(creation_per_node: float, execution_slope: float) -> float:
    """Real-valued batch size minimizing creation_per_node*S + execution_slope/S."""
    if not creation_per_node > 0.0 or not execution_slope > 0.0:
        raise ValueError(
            "no interior optimum: needs positive creation_per_node and positive "
            "execution slope"
        )
    return math.sqrt(execution_slope / creation_per_node)


def memory_usage(memory: MemoryModel, batch_size: int) -> int:
    """Bytes held by one chain of ``batch_size`` nodes (exact integer arithmetic)."""
    size = _positive_count(batch_size, "batch_size")
    return memory.base_bytes + memory.bytes_per_node * size
