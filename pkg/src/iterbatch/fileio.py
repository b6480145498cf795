"""File formats: parameter files, measurement CSVs, event-trace CSVs.

All three schemas are versioned by a ``# schema=1`` first-line comment;
a missing schema line is read as version 1. Written files always carry it.
Fixed formatting keeps outputs byte-deterministic: timestamps and wall-clock
seconds use 9 decimals, other reals use 6 significant digits scientific.
"""

from __future__ import annotations

import re
from pathlib import Path

from .fitting import FitResult, MeasurementPoint, MeasurementSeries
from .model import MemoryModel, TimingParameters
from .optimize import Recommendation
from .simulate import EventKind, EventTrace, TraceEvent, TraceSummary

__all__ = [
    "parse_params",
    "parse_measurements",
    "write_measurements_csv",
    "write_trace_csv",
    "parse_trace_csv",
    "format_seconds",
    "format_sci",
    "summary_line",
    "fit_result_line",
    "recommendation_line",
]

_SCHEMA_RE = re.compile(r"#\s*schema\s*=\s*(\d+)\s*$")

_TIMING_KEY_TO_FIELD = {
    "t_k": "kernel_time",
    "t_i": "intra_graph_gap",
    "t_a": "inter_graph_gap",
    "t_l": "first_launch_latency",
    "t_b": "baseline_gap",
    "k_c": "creation_per_node",
    "b_c": "creation_base",
}
_MEMORY_KEYS = ("m_base", "m_node")
_REQUIRED_KEYS = ("t_k", "t_i", "t_a", "t_l", "k_c", "b_c")
_ALL_KEYS = tuple(_TIMING_KEY_TO_FIELD) + _MEMORY_KEYS

MEASUREMENT_HEADER = "batch_size,run_index,seconds"
TRACE_HEADER = "timestamp,kind,batch_index,kernel_index"


def format_seconds(value: float) -> str:
    return f"{value:.9f}"


def format_sci(value: float) -> str:
    # 6 significant digits
    return f"{value:.5e}"


def _check_schema(line: str, where: str) -> bool:
    """True if the line is a comment; rejects non-1 schema versions."""
    if not line.lstrip().startswith("#"):
        return False
    match = _SCHEMA_RE.match(line.strip())
    if match and match.group(1) != "1":
        raise ValueError(f"{where}: unsupported schema version {match.group(1)}")
    return True


def parse_params(path) -> tuple[TimingParameters, MemoryModel | None]:
    """Read a key=value parameter file.

    Keys are exactly t_k, t_i, t_a, t_l, t_b, k_c, b_c, m_base, m_node;
    t_b is optional and defaults to t_a, the memory keys are optional and
    a MemoryModel is returned only when at least one of them is present.
    """
    path = Path(path)
    values: dict[str, float] = {}
    lines: dict[str, int] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            where = f"{path}:{lineno}"
            if _check_schema(raw, where):
                continue
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, text = line.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ValueError(f"{where}: expected key=value, got {line!r}")
            if key not in _ALL_KEYS:
                raise ValueError(f"{where}: unknown key {key!r}")
            if key in values:
                raise ValueError(
                    f"{where}: duplicate key {key!r} (first set on line {lines[key]})"
                )
            try:
                values[key] = float(text.strip())
            except ValueError:
                raise ValueError(
                    f"{where}: malformed number {text.strip()!r} for key {key!r}"
                ) from None
            lines[key] = lineno

    missing = [k for k in _REQUIRED_KEYS if k not in values]
    if missing:
        raise ValueError(f"{path}: missing required key(s): {', '.join(missing)}")

    params = TimingParameters(
        **{field: values[key] for key, field in _TIMING_KEY_TO_FIELD.items() if key in values}
    )

    memory = None
    if any(k in values for k in _MEMORY_KEYS):
        as_bytes = {}
        for key in _MEMORY_KEYS:
            raw_value = values.get(key, 0.0)
            if not float(raw_value).is_integer():
                raise ValueError(
                    f"{path}:{lines[key]}: {key} must be whole bytes, got {raw_value!r}"
                )
            as_bytes[key] = int(raw_value)
        memory = MemoryModel(as_bytes["m_base"], as_bytes["m_node"])
    return params, memory


def parse_measurements(path) -> MeasurementSeries:
    """Read a batch_size,run_index,seconds CSV into a measurement series.

    run_index must count 0, 1, 2, ... within each batch size; seconds must
    be positive. Rows for one batch size are grouped into a single point.
    """
    path = Path(path)
    groups: dict[int, list[float]] = {}
    next_run: dict[int, int] = {}
    header_seen = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            where = f"{path}:{lineno}"
            if _check_schema(raw, where):
                continue
            line = raw.strip()
            if not line:
                continue
            if not header_seen:
                if line != MEASUREMENT_HEADER:
                    raise ValueError(
                        f"{where}: expected header {MEASUREMENT_HEADER!r}, got {line!r}"
                    )
                header_seen = True
                continue
            fields = line.split(",")
            if len(fields) != 3:
                raise ValueError(f"{where}: expected 3 fields, got {len(fields)}")
            try:
                batch = int(fields[0])
                run = int(fields[1])
                seconds = float(fields[2])
            except ValueError:
                raise ValueError(f"{where}: malformed row {line!r}") from None
            if batch < 1:
                raise ValueError(f"{where}: batch_size must be positive, got {batch}")
            expected = next_run.get(batch, 0)
            if run != expected:
                raise ValueError(
                    f"{where}: run_index for batch_size {batch} must be {expected}, "
                    f"got {run}"
                )
            if not seconds > 0.0:
                raise ValueError(f"{where}: seconds must be positive, got {seconds!r}")
            next_run[batch] = expected + 1
            groups.setdefault(batch, []).append(seconds)
    if not header_seen:
        raise ValueError(f"{path}: empty file, expected header {MEASUREMENT_HEADER!r}")
    if not groups:
        raise ValueError(f"{path}: no measurement rows")
    points = tuple(
        MeasurementPoint(batch, tuple(samples)) for batch, samples in groups.items()
    )
    return MeasurementSeries(points, label=path.stem)


def write_measurements_csv(series: MeasurementSeries, path) -> None:
    with open(path, "w") as fh:
        fh.write("# schema=1\n")
        fh.write(MEASUREMENT_HEADER + "\n")
        for point in series.points:
            for run, seconds in enumerate(point.samples):
                fh.write(f"{point.batch_size},{run},{format_seconds(seconds)}\n")


def write_trace_csv(trace: EventTrace, path) -> None:
    with open(path, "w") as fh:
        fh.write("# schema=1\n")
        fh.write(TRACE_HEADER + "\n")
        for event in trace.events:
            batch = "" if event.batch_index is None else str(event.batch_index)
            kernel = "" if event.kernel_index is None else str(event.kernel_index)
            fh.write(
                f"{format_seconds(event.timestamp)},{event.kind.value},{batch},{kernel}\n"
            )


def parse_trace_csv(path) -> tuple[TraceEvent, ...]:
    """Read back a trace CSV (timestamps keep their 9-decimal precision)."""
    path = Path(path)
    events: list[TraceEvent] = []
    header_seen = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            where = f"{path}:{lineno}"
            if _check_schema(raw, where):
                continue
            line = raw.strip()
            if not line:
                continue
            if not header_seen:
                if line != TRACE_HEADER:
                    raise ValueError(
                        f"{where}: expected header {TRACE_HEADER!r}, got {line!r}"
                    )
                header_seen = True
                continue
            fields = line.split(",")
            if len(fields) != 4:
                raise ValueError(f"{where}: expected 4 fields, got {len(fields)}")
            try:
                timestamp = float(fields[0])
                batch = int(fields[2]) if fields[2] else None
                kernel = int(fields[3]) if fields[3] else None
            except ValueError:
                raise ValueError(f"{where}: malformed row {line!r}") from None
            try:
                kind = EventKind(fields[1])
            except ValueError:
                raise ValueError(
                    f"{where}: unknown event kind {fields[1]!r}"
                ) from None
            events.append(TraceEvent(timestamp, kind, batch, kernel))
    if not header_seen:
        raise ValueError(f"{path}: empty file, expected header {TRACE_HEADER!r}")
    return tuple(events)


def summary_line(summary: TraceSummary) -> str:
    return (
        f"{format_seconds(summary.creation_span)},"
        f"{format_seconds(summary.execution_span)},"
        f"{format_seconds(summary.total)}"
    )


def fit_result_line(result: FitResult) -> str:
    return (
        f"{result.kind.value},{format_sci(result.slope)},{format_sci(result.intercept)},"
        f"{format_sci(result.mae)},{result.points_used}"
    )


def recommendation_line(rec: Recommendation) -> str:
    continuous = "" if rec.continuous_optimum is None else format_sci(rec.continuous_optimum)
    return (
        f"{rec.batch_size},{rec.num_batches},{format_sci(rec.predicted_total)},"
        f"{format_sci(rec.predicted_speedup)},{continuous}"
    )
