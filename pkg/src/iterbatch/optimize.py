"""Batch-size selection over the divisors of the total kernel count."""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

from .model import (
    MemoryModel,
    ReciprocalCoefficients,
    TimingParameters,
    baseline_time,
    creation_time,
    memory_usage,
    reciprocal_coefficients,
)

__all__ = [
    "Recommendation",
    "feasible_batch_sizes",
    "recommend",
    "recommend_from_coefficients",
    "crossover_batches",
]


@dataclass(frozen=True)
class Recommendation:
    batch_size: int
    num_batches: int
    predicted_total: float
    predicted_speedup: float
    continuous_optimum: float | None
    candidates_evaluated: int
    memory_at_choice: int | None


def feasible_batch_sizes(total_kernel_executions: int) -> tuple[int, ...]:
    """All divisors of the kernel count, ascending."""
    total = operator.index(total_kernel_executions)
    if total < 1:
        raise ValueError("total_kernel_executions must be >= 1")
    small: list[int] = []
    large: list[int] = []
    d = 1
    while d * d <= total:
        if total % d == 0:
            small.append(d)
            if d != total // d:
                large.append(total // d)
        d += 1
    return tuple(small + large[::-1])


def _argmin_divisor(
    creation_per_node: float,
    creation_base: float,
    coeffs: ReciprocalCoefficients,
    total: int,
    memory: MemoryModel | None,
    memory_cap: int | None,
    validity_fraction: float,
    baseline: float,
) -> Recommendation:
    if not 0.0 < validity_fraction <= 1.0:
        raise ValueError(f"validity_fraction must be in (0, 1], got {validity_fraction!r}")
    if memory_cap is not None and memory is None:
        raise ValueError("memory_cap given without a memory model")

    bound = validity_fraction * total
    best_size = None
    best_total = math.inf
    evaluated = 0
    for size in feasible_batch_sizes(total):
        if size > bound:
            break
        if memory_cap is not None and memory_usage(memory, size) > memory_cap:
            continue
        evaluated += 1
        candidate = (
            creation_per_node * size + creation_base + coeffs.execution_time(size)
        )
        # strict < keeps the smaller batch size on ties
        if candidate < best_total:
            best_size, best_total = size, candidate
    if best_size is None:
        raise ValueError(
            "no feasible batch size: every divisor fails the validity bound "
            "or the memory cap"
        )

    if creation_per_node > 0.0 and coeffs.slope > 0.0:
        continuous = math.sqrt(coeffs.slope / creation_per_node)
    else:
        continuous = None
    return Recommendation(
        batch_size=best_size,
        num_batches=total // best_size,
        predicted_total=best_total,
        predicted_speedup=baseline / best_total,
        continuous_optimum=continuous,
        candidates_evaluated=evaluated,
        memory_at_choice=memory_usage(memory, best_size) if memory is not None else None,
    )


def recommend(
    params: TimingParameters,
    total_kernel_executions: int,
    memory: MemoryModel | None = None,
    memory_cap: int | None = None,
    validity_fraction: float = 0.25,
) -> Recommendation:
    """Pick the divisor batch size with the smallest predicted total time.

    Candidates run over the divisors of the kernel count, capped at
    validity_fraction of it (large batches leave too few launches for the
    model to hold) and optionally by a device memory cap.
    """
    total = operator.index(total_kernel_executions)
    coeffs = reciprocal_coefficients(params, total)
    return _argmin_divisor(
        params.creation_per_node,
        params.creation_base,
        coeffs,
        total,
        memory,
        memory_cap,
        validity_fraction,
        baseline_time(params, total),
    )


def recommend_from_coefficients(
    creation_slope: float,
    creation_intercept: float,
    execution_slope: float,
    execution_intercept: float,
    total_kernel_executions: int,
    memory: MemoryModel | None = None,
    memory_cap: int | None = None,
    validity_fraction: float = 0.25,
) -> Recommendation:
    """Same search driven by fitted coefficients instead of raw parameters.

    The baseline here is execution_slope + execution_intercept: with the
    loop's kernel-to-kernel gap equal to the between-batch gap (the default
    assumption), the plain loop costs exactly the one-kernel-per-batch
    execution time, which is the reciprocal model at batch size 1.
    """
    total = operator.index(total_kernel_executions)
    if total < 1:
        raise ValueError("total_kernel_executions must be >= 1")
    coeffs = ReciprocalCoefficients(execution_slope, execution_intercept)
    return _argmin_divisor(
        creation_slope,
        creation_intercept,
        coeffs,
        total,
        memory,
        memory_cap,
        validity_fraction,
        execution_slope + execution_intercept,
    )


def crossover_batches(
    params: TimingParameters, batch_size: int, max_batches: int = 10**6
) -> int | None:
    """Smallest batch count where the chain path, build cost included,
    strictly beats the plain loop over the same kernel count.

    Returns None when no count up to max_batches qualifies; an early exit
    covers the case where the margin never improves (the difference is
    affine in the batch count).
    """
    size = operator.index(batch_size)
    if size < 1:
        raise ValueError("batch_size must be >= 1")
    if operator.index(max_batches) < 1:
        raise ValueError("max_batches must be >= 1")

    # The launch latency and the kernel time itself appear on both sides, so
    # the batched-minus-plain difference reduces symbolically to
    #   build + num*(size-1)*(intra - plain_gap) + (num-1)*(inter - plain_gap)
    # which is affine in the batch count. Evaluating this form instead of
    # subtracting two near-equal totals keeps exact ties exact.
    build = creation_time(params, size)
    intra_saving = params.intra_graph_gap - params.baseline_gap
    inter_saving = params.inter_graph_gap - params.baseline_gap
    slope = (size - 1) * intra_saving + inter_saving
    offset = build - inter_saving

    def margin(num_batches: int) -> float:
        return offset + slope * num_batches

    if margin(1) < 0.0:
        return 1
    if slope >= 0.0:
        return None
    # strictly decreasing margin: jump near the zero crossing, then step
    start = max(2, math.floor(-offset / slope) - 2)
    for num in range(start, max_batches + 1):
        if margin(num) < 0.0:
            return num
    return None
