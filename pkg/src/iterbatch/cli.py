"""Command line front end.

Exit codes: 0 success, 1 data errors (bad files, unsatisfiable values),
2 usage errors. Diagnostics go to stderr, data to stdout.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .fileio import (
    fit_result_line,
    format_sci,
    parse_measurements,
    parse_params,
    recommendation_line,
    summary_line,
    write_measurements_csv,
    write_trace_csv,
)
from .fitting import fit_creation, fit_execution, fit_validity_filter
from .model import BatchPlan, SampleStats, measured_speedup
from .optimize import recommend
from .simulate import simulate_baseline, simulate_graph, trace_summary
from .workloads import (
    ExecutionOrder,
    HotspotWorkload,
    VectorWorkload,
    fdtd_program,
    hotspot_program,
    run_batched,
    run_loop,
    state_checksum,
    te101_cavity,
    time_workload,
    vector_program,
)

_WORKLOAD_SEED = 20240817


class UsageError(Exception):
    pass


def _comma_sizes(text: str) -> list[int]:
    try:
        sizes = [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be integers, got {text!r}")
    if not sizes or any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError(f"sizes must be positive, got {text!r}")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iterbatch",
        description="Model, simulate, fit, and optimize iteration batching "
        "for repeatedly launched kernels.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser(
        "simulate", help="replay one plan on the virtual clock"
    )
    sim.add_argument("--params", required=True, help="key=value parameter file")
    sim.add_argument("--iterations", type=int, required=True, metavar="I_K")
    sim.add_argument(
        "--batch-size", type=int, required=True, metavar="S",
        help="iterations per chain (ignored in baseline mode)",
    )
    sim.add_argument("--mode", choices=["graph", "baseline"], default="graph")
    sim.add_argument("--trace", metavar="OUT.csv", help="also write the event trace")
    sim.set_defaults(func=_cmd_simulate)

    fit = commands.add_parser("fit", help="fit a cost curve to measurements")
    fit.add_argument("--input", required=True, metavar="M.csv")
    fit.add_argument("--kind", choices=["creation", "execution"], required=True)
    fit.add_argument("--total-iterations", type=int, metavar="I_K")
    fit.add_argument(
        "--validity-fraction", type=float, default=None, metavar="R",
        help="drop batch sizes above R * I_K before fitting (default 0.25)",
    )
    fit.set_defaults(func=_cmd_fit)

    opt = commands.add_parser("optimize", help="recommend a batch size")
    opt.add_argument("--params", required=True)
    opt.add_argument("--iterations", type=int, required=True, metavar="I_K")
    opt.add_argument("--mem-cap", type=int, metavar="BYTES")
    opt.add_argument("--validity-fraction", type=float, default=0.25, metavar="R")
    opt.set_defaults(func=_cmd_optimize)

    run = commands.add_parser(
        "run-workload", help="execute a workload and measure or checksum it"
    )
    run.add_argument(
        "--workload", choices=["vector", "hotspot2d", "hotspot3d", "fdtd"],
        required=True,
    )
    run.add_argument(
        "--size", type=_comma_sizes, required=True, metavar="N[,N2[,N3]]"
    )
    run.add_argument("--iterations", type=int, required=True, metavar="I_K")
    run.add_argument("--batch-size", type=int, required=True, metavar="S")
    run.add_argument("--mode", choices=["loop", "batched"], required=True)
    run.add_argument("--repeats", type=int, default=10)
    run.add_argument("--timings", metavar="OUT.csv", help="write measured seconds")
    run.add_argument(
        "--checksum", action="store_true", help="print the final-state checksum"
    )
    run.set_defaults(func=_cmd_run_workload)

    speed = commands.add_parser(
        "speedup", help="measured speedup of batched over loop runs"
    )
    speed.add_argument("--baseline", required=True, metavar="B.csv")
    speed.add_argument("--graph", required=True, metavar="G.csv")
    speed.set_defaults(func=_cmd_speedup)

    return parser


def _cmd_simulate(args) -> int:
    params, _ = parse_params(args.params)
    if args.mode == "graph":
        plan = BatchPlan.from_batch_size(args.iterations, args.batch_size)
        trace = simulate_graph(params, plan)
    else:
        trace = simulate_baseline(params, args.iterations)
    if args.trace:
        write_trace_csv(trace, args.trace)
    print(summary_line(trace_summary(trace)))
    return 0


def _cmd_fit(args) -> int:
    if args.validity_fraction is not None and args.total_iterations is None:
        raise UsageError("--validity-fraction requires --total-iterations")
    series = parse_measurements(args.input)
    if args.total_iterations is not None:
        fraction = 0.25 if args.validity_fraction is None else args.validity_fraction
        series = fit_validity_filter(series, fraction, args.total_iterations)
    if args.kind == "creation":
        result = fit_creation(series)
    else:
        result = fit_execution(series)
    print(fit_result_line(result))
    return 0


def _cmd_optimize(args) -> int:
    params, memory = parse_params(args.params)
    if args.mem_cap is not None and memory is None:
        raise ValueError(
            f"{args.params} has no m_base/m_node keys but --mem-cap was given"
        )
    rec = recommend(
        params,
        args.iterations,
        memory=memory,
        memory_cap=args.mem_cap,
        validity_fraction=args.validity_fraction,
    )
    print(recommendation_line(rec))
    return 0


def _build_workload(family: str, sizes: list[int]):
    rng = np.random.default_rng(_WORKLOAD_SEED)
    if family == "vector":
        if len(sizes) != 1:
            raise UsageError("vector takes one size: N")
        return VectorWorkload(rng.random(sizes[0]), 0.9999)
    if family == "hotspot2d":
        if len(sizes) not in (1, 2):
            raise UsageError("hotspot2d takes N or N,N2 (rows, cols)")
        shape = (sizes[0], sizes[-1])
        return HotspotWorkload(rng.random(shape), rng.random(shape) * 1e-3, 0.1)
    if family == "hotspot3d":
        if len(sizes) == 1:
            shape = (sizes[0],) * 3
        elif len(sizes) == 2:  # grid edge plus layer count
            shape = (sizes[0], sizes[0], sizes[1])
        elif len(sizes) == 3:
            shape = tuple(sizes)
        else:
            raise UsageError("hotspot3d takes N, N,LAYERS, or N,N2,N3")
        return HotspotWorkload(rng.random(shape), rng.random(shape) * 1e-3, 0.1)
    if len(sizes) == 1:
        nx = ny = nz = sizes[0]
    elif len(sizes) == 3:
        nx, ny, nz = sizes
    else:
        raise UsageError("fdtd takes N or N,N2,N3 (cells per axis)")
    return te101_cavity(nx, ny, nz)


_PROGRAMS = {
    "vector": vector_program,
    "hotspot2d": hotspot_program,
    "hotspot3d": hotspot_program,
    "fdtd": fdtd_program,
}


def _cmd_run_workload(args) -> int:
    if not args.checksum and not args.timings:
        raise UsageError("nothing to do: pass --checksum and/or --timings")
    state = _build_workload(args.workload, args.size)
    program = _PROGRAMS[args.workload]()
    plan = BatchPlan.from_batch_size(args.iterations, args.batch_size)
    order = ExecutionOrder(args.mode)
    if args.checksum:
        if order is ExecutionOrder.LOOP:
            final = run_loop(program, state.copy(), plan.total_kernel_executions)
        else:
            final = run_batched(
                program, state.copy(), plan.batch_size, plan.num_batches
            )
        print(f"{state_checksum(final):016x}")
    if args.timings:
        series = time_workload(
            program, state, plan, order, repeats=args.repeats, label=args.workload
        )
        write_measurements_csv(series, args.timings)
    return 0


def _cmd_speedup(args) -> int:
    def stats_by_size(path):
        series = parse_measurements(path)
        return {p.batch_size: SampleStats.from_samples(p.samples) for p in series.points}

    base = stats_by_size(args.baseline)
    graph = stats_by_size(args.graph)
    common = sorted(set(base) & set(graph))
    for size in sorted(set(base) - set(graph)):
        print(f"batch_size {size} only in {args.baseline}, skipped", file=sys.stderr)
    for size in sorted(set(graph) - set(base)):
        print(f"batch_size {size} only in {args.graph}, skipped", file=sys.stderr)
    if not common:
        raise ValueError("no matching batch sizes between the two files")
    for size in common:
        estimate = measured_speedup(base[size], graph[size])
        print(f"{format_sci(estimate.ratio)},{format_sci(estimate.error)}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
