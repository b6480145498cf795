"""Event-level replay of the batched and plain launch timelines.

The clock is a plain float accumulator; nothing sleeps. A replay emits
every build, launch, gap, and kernel interval as timestamped events, and
the span totals land on the closed-form model (up to float accumulation).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .model import BatchPlan, TimingParameters

__all__ = [
    "EventKind",
    "TraceMode",
    "TraceEvent",
    "EventTrace",
    "TraceSummary",
    "simulate_graph",
    "simulate_baseline",
    "trace_summary",
]


class EventKind(Enum):
    NODE_ADDED = "node_added"
    GRAPH_INSTANTIATED = "graph_instantiated"
    GRAPH_UPLOADED = "graph_uploaded"
    GRAPH_LAUNCHED = "graph_launched"
    KERNEL_STARTED = "kernel_started"
    KERNEL_ENDED = "kernel_ended"
    BATCH_GAP_STARTED = "batch_gap_started"
    BASELINE_KERNEL_LAUNCHED = "baseline_kernel_launched"


class TraceMode(Enum):
    BASELINE = "baseline"
    GRAPH = "graph"


@dataclass(frozen=True)
class TraceEvent:
    timestamp: float
    kind: EventKind
    batch_index: int | None = None
    kernel_index: int | None = None


@dataclass(frozen=True)
class EventTrace:
    """An ordered event list plus the plan and parameters that produced it."""

    events: tuple[TraceEvent, ...]
    mode: TraceMode
    plan: BatchPlan
    params: TimingParameters

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        previous = None
        for event in self.events:
            if previous is not None and event.timestamp < previous:
                raise ValueError("event timestamps must be nondecreasing")
            previous = event.timestamp
            if event.batch_index is not None and not (
                0 <= event.batch_index < self.plan.num_batches
            ):
                raise ValueError(f"batch_index out of range: {event.batch_index}")
            if event.kernel_index is not None and not (
                0 <= event.kernel_index < self.plan.batch_size
            ):
                raise ValueError(f"kernel_index out of range: {event.kernel_index}")


class TraceSummary(NamedTuple):
    creation_span: float
    execution_span: float
    total: float


def simulate_graph(params: TimingParameters, plan: BatchPlan) -> EventTrace:
    """Replay one batched run on a virtual clock starting at zero.

    Build phase: one NODE_ADDED per chain node, uniformly spaced at
    creation_per_node (completion-stamped), then GRAPH_INSTANTIATED and
    GRAPH_UPLOADED consuming creation_base between them. Execution phase:
    the first kernel starts first_launch_latency after the first launch;
    inside a batch kernels are separated by intra_graph_gap; each later
    batch's first kernel starts inter_graph_gap after the previous batch's
    last kernel ended.
    """
    events: list[TraceEvent] = []
    size, num = plan.batch_size, plan.num_batches

    clock = 0.0
    for node in range(size):
        clock += params.creation_per_node
        events.append(TraceEvent(clock, EventKind.NODE_ADDED, kernel_index=node))
    clock += params.creation_base / 2.0
    events.append(TraceEvent(clock, EventKind.GRAPH_INSTANTIATED))
    clock += params.creation_base / 2.0
    events.append(TraceEvent(clock, EventKind.GRAPH_UPLOADED))

    end = clock
    for batch in range(num):
        if batch == 0:
            events.append(TraceEvent(clock, EventKind.GRAPH_LAUNCHED, batch_index=0))
            start = clock + params.first_launch_latency
        else:
            # launch is issued the instant the previous batch drains
            events.append(TraceEvent(end, EventKind.BATCH_GAP_STARTED, batch_index=batch))
            events.append(TraceEvent(end, EventKind.GRAPH_LAUNCHED, batch_index=batch))
            start = end + params.inter_graph_gap
        for kernel in range(size):
            events.append(
                TraceEvent(start, EventKind.KERNEL_STARTED, batch, kernel)
            )
            end = start + params.kernel_time
            events.append(TraceEvent(end, EventKind.KERNEL_ENDED, batch, kernel))
            start = end + params.intra_graph_gap

    return EventTrace(tuple(events), TraceMode.GRAPH, plan, params)


def simulate_baseline(
    params: TimingParameters, total_kernel_executions: int
) -> EventTrace:
    """Replay the plain launch loop: no build phase, one launch per kernel."""
    plan = BatchPlan(total_kernel_executions, 1, total_kernel_executions)
    events: list[TraceEvent] = []
    clock = 0.0
    for index in range(plan.num_batches):
        events.append(
            TraceEvent(clock, EventKind.BASELINE_KERNEL_LAUNCHED, index, 0)
        )
        gap = params.first_launch_latency if index == 0 else params.baseline_gap
        start = clock + gap
        events.append(TraceEvent(start, EventKind.KERNEL_STARTED, index, 0))
        clock = start + params.kernel_time
        events.append(TraceEvent(clock, EventKind.KERNEL_ENDED, index, 0))
    return EventTrace(tuple(events), TraceMode.BASELINE, plan, params)


def _last_timestamp(events, kind: EventKind) -> float | None:
    for event in reversed(events):
        if event.kind is kind:
            return event.timestamp
    return None


def _first_timestamp(events, kind: EventKind) -> float | None:
    for event in events:
        if event.kind is kind:
            return event.timestamp
    return None


def trace_summary(trace: EventTrace) -> TraceSummary:
    """Spans recomputed purely from event timestamps.

    The build starts the virtual clock at zero, so the creation span is the
    GRAPH_UPLOADED timestamp (zero in baseline mode); the execution span runs
    from the first launch event to the last KERNEL_ENDED.
    """
    events = trace.events
    started = sum(1 for e in events if e.kind is EventKind.KERNEL_STARTED)
    ended = sum(1 for e in events if e.kind is EventKind.KERNEL_ENDED)
    if started != ended or started == 0:
        raise ValueError(
            f"malformed trace: {started} KERNEL_STARTED vs {ended} KERNEL_ENDED"
        )

    if trace.mode is TraceMode.GRAPH:
        uploaded = _last_timestamp(events, EventKind.GRAPH_UPLOADED)
        if uploaded is None:
            raise ValueError("malformed trace: no GRAPH_UPLOADED event")
        creation_span = uploaded
        first_launch = _first_timestamp(events, EventKind.GRAPH_LAUNCHED)
        if first_launch is None:
            raise ValueError("malformed trace: no GRAPH_LAUNCHED event")
    else:
        creation_span = 0.0
        first_launch = _first_timestamp(events, EventKind.BASELINE_KERNEL_LAUNCHED)
        if first_launch is None:
            raise ValueError("malformed trace: no BASELINE_KERNEL_LAUNCHED event")

    last_end = _last_timestamp(events, EventKind.KERNEL_ENDED)
    execution_span = last_end - first_launch
    return TraceSummary(creation_span, execution_span, creation_span + execution_span)
