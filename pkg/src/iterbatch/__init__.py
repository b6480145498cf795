"""Model, simulate, fit, and optimize iteration batching for repeatedly
launched kernels."""

from .fitting import (
    FitKind,
    FitResult,
    MeasurementPoint,
    MeasurementSeries,
    fit_creation,
    fit_execution,
    fit_validity_filter,
)
from .model import (
    BatchPlan,
    MemoryModel,
    ReciprocalCoefficients,
    SampleStats,
    SpeedupEstimate,
    TimingParameters,
    baseline_time,
    continuous_optimal_batch,
    creation_time,
    execution_time_closed,
    execution_time_expanded,
    measured_speedup,
    memory_usage,
    model_speedup,
    reciprocal_coefficients,
    total_time,
)
from .optimize import (
    Recommendation,
    crossover_batches,
    feasible_batch_sizes,
    recommend,
    recommend_from_coefficients,
)
from .simulate import (
    EventKind,
    EventTrace,
    TraceEvent,
    TraceMode,
    TraceSummary,
    simulate_baseline,
    simulate_graph,
    trace_summary,
)
from .workloads import (
    ChainProgram,
    ExecutionOrder,
    FdtdWorkload,
    HotspotWorkload,
    VectorWorkload,
    fdtd_cavity,
    fdtd_e_step,
    fdtd_h_step,
    fdtd_program,
    hotspot_program,
    hotspot_step,
    run_batched,
    run_loop,
    state_checksum,
    te101_cavity,
    time_workload,
    vector_program,
    vector_scale_step,
)

__version__ = "0.1.0"
