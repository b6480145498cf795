"""Functional workload families driven as repeated kernel-style steps.

Every family keeps its state in float64 arrays and advances through pure
steps that read only the previous buffers, so any batching of the step
sequence reproduces the plain loop bit for bit. An optional data-parallel
mode partitions each output array into row slabs computed by threads; the
per-element arithmetic is unchanged, so results stay bit-identical.
"""

from __future__ import annotations

import math
import operator
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fitting import MeasurementPoint, MeasurementSeries
from .model import BatchPlan

__all__ = [
    "VectorWorkload",
    "HotspotWorkload",
    "FdtdWorkload",
    "ChainProgram",
    "ExecutionOrder",
    "vector_scale_step",
    "hotspot_step",
    "fdtd_h_step",
    "fdtd_e_step",
    "vector_program",
    "hotspot_program",
    "fdtd_program",
    "fdtd_cavity",
    "te101_cavity",
    "run_loop",
    "run_batched",
    "time_workload",
    "state_checksum",
    "VACUUM_LIGHT_SPEED",
    "VACUUM_PERMEABILITY",
    "VACUUM_PERMITTIVITY",
]

VACUUM_LIGHT_SPEED = 299792458.0
VACUUM_PERMEABILITY = 4.0e-7 * math.pi
VACUUM_PERMITTIVITY = 1.0 / (VACUUM_PERMEABILITY * VACUUM_LIGHT_SPEED**2)


def _as_float64(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.size == 0:
        raise ValueError(f"{name} must not be empty")
    return arr


def _fill_slabs(n_rows: int, fill, workers: int | None) -> None:
    """Run fill(lo, hi) over the whole row range, in slabs when threaded."""
    if workers is None or workers <= 1 or n_rows <= 1:
        fill(0, n_rows)
        return
    bounds = [n_rows * i // workers for i in range(workers + 1)]
    slabs = [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if lo < hi]
    with ThreadPoolExecutor(max_workers=len(slabs)) as pool:
        for _ in pool.map(lambda span: fill(*span), slabs):
            pass


@dataclass(frozen=True, eq=False)
class VectorWorkload:
    """A 1-D array repeatedly scaled by a constant."""

    values: np.ndarray
    scale_constant: float

    def __post_init__(self):
        values = _as_float64(self.values, "values")
        if values.ndim != 1:
            raise ValueError(f"values must be 1-D, got shape {values.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "scale_constant", float(self.scale_constant))

    @property
    def length(self) -> int:
        return self.values.shape[0]

    def copy(self) -> "VectorWorkload":
        return VectorWorkload(self.values.copy(), self.scale_constant)

    def state_arrays(self) -> tuple[np.ndarray, ...]:
        return (self.values,)


def vector_scale_step(w: VectorWorkload, workers: int | None = None) -> VectorWorkload:
    out = np.empty_like(w.values)
    c = w.scale_constant

    def fill(lo, hi):
        out[lo:hi] = w.values[lo:hi] * c

    _fill_slabs(out.shape[0], fill, workers)
    return VectorWorkload(out, c)


@dataclass(frozen=True, eq=False)
class HotspotWorkload:
    """Explicit heat diffusion with a source term on a 2-D or 3-D grid.

    Out-of-grid neighbors reuse the edge cell's own value (adiabatic
    boundary). The explicit update is only stable for
    diffusion_coefficient <= 1/(2*dims), enforced here at construction
    rather than per step.
    """

    temperature: np.ndarray
    power: np.ndarray
    diffusion_coefficient: float

    def __post_init__(self):
        temperature = _as_float64(self.temperature, "temperature")
        power = _as_float64(self.power, "power")
        if temperature.ndim not in (2, 3):
            raise ValueError(f"temperature must be 2-D or 3-D, got {temperature.ndim}-D")
        if power.shape != temperature.shape:
            raise ValueError(
                f"power shape {power.shape} != temperature shape {temperature.shape}"
            )
        coeff = float(self.diffusion_coefficient)
        limit = 1.0 / (2.0 * temperature.ndim)
        if not 0.0 <= coeff <= limit:
            raise ValueError(
                f"diffusion_coefficient {coeff!r} outside stable range [0, {limit}] "
                f"for {temperature.ndim}-D"
            )
        object.__setattr__(self, "temperature", temperature)
        object.__setattr__(self, "power", power)
        object.__setattr__(self, "diffusion_coefficient", coeff)

    @property
    def dims(self) -> int:
        return self.temperature.ndim

    @property
    def rows(self) -> int:
        return self.temperature.shape[0]

    @property
    def cols(self) -> int:
        return self.temperature.shape[1]

    @property
    def layers(self) -> int:
        return self.temperature.shape[2] if self.dims == 3 else 1

    def copy(self) -> "HotspotWorkload":
        return HotspotWorkload(
            self.temperature.copy(), self.power.copy(), self.diffusion_coefficient
        )

    def state_arrays(self) -> tuple[np.ndarray, ...]:
        return (self.temperature, self.power)


def hotspot_step(w: HotspotWorkload, workers: int | None = None) -> HotspotWorkload:
    """One Jacobi update: T + k*(neighbor_sum - 2*dims*T) + power.

    The neighbor sum is grouped per axis so mirrored grids stay exactly
    symmetric in floating point.
    """
    temp = w.temperature
    power = w.power
    k = w.diffusion_coefficient
    loss = 2.0 * w.dims
    padded = np.pad(temp, 1, mode="edge")
    out = np.empty_like(temp)

    if w.dims == 2:
        def fill(lo, hi):
            center = padded[lo + 1 : hi + 1, 1:-1]
            x_pair = padded[lo : hi, 1:-1] + padded[lo + 2 : hi + 2, 1:-1]
            y_pair = padded[lo + 1 : hi + 1, :-2] + padded[lo + 1 : hi + 1, 2:]
            out[lo:hi] = center + k * ((x_pair + y_pair) - loss * center) + power[lo:hi]
    else:
        def fill(lo, hi):
            center = padded[lo + 1 : hi + 1, 1:-1, 1:-1]
            x_pair = (
                padded[lo : hi, 1:-1, 1:-1] + padded[lo + 2 : hi + 2, 1:-1, 1:-1]
            )
            y_pair = (
                padded[lo + 1 : hi + 1, :-2, 1:-1]
                + padded[lo + 1 : hi + 1, 2:, 1:-1]
            )
            z_pair = (
                padded[lo + 1 : hi + 1, 1:-1, :-2]
                + padded[lo + 1 : hi + 1, 1:-1, 2:]
            )
            out[lo:hi] = (
                center
                + k * (((x_pair + y_pair) + z_pair) - loss * center)
                + power[lo:hi]
            )

    _fill_slabs(out.shape[0], fill, workers)
    return HotspotWorkload(out, power, k)


@dataclass(frozen=True, eq=False)
class FdtdWorkload:
    """Staggered-grid electromagnetic fields in a closed conducting box.

    The box has nx*ny*nz cubic cells of side cell_size. Electric components
    live on cell edges, magnetic components on cell faces; the shapes below
    follow from that staggering. The leapfrog step is only stable for
    time_step <= cell_size / (c * sqrt(3)), enforced at construction.
    """

    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    hz: np.ndarray
    cell_size: float
    time_step: float

    def __post_init__(self):
        for name in ("ex", "ey", "ez", "hx", "hy", "hz"):
            object.__setattr__(self, name, _as_float64(getattr(self, name), name))
        object.__setattr__(self, "cell_size", float(self.cell_size))
        object.__setattr__(self, "time_step", float(self.time_step))
        if self.cell_size <= 0.0:
            raise ValueError("cell_size must be positive")
        nx, ny, nz = self.dims
        expected = {
            "ex": (nx, ny + 1, nz + 1),
            "ey": (nx + 1, ny, nz + 1),
            "ez": (nx + 1, ny + 1, nz),
            "hx": (nx + 1, ny, nz),
            "hy": (nx, ny + 1, nz),
            "hz": (nx, ny, nz + 1),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ValueError(f"{name} shape {actual} != expected {shape}")
        limit = self.cell_size / (VACUUM_LIGHT_SPEED * math.sqrt(3.0))
        if not 0.0 < self.time_step <= limit:
            raise ValueError(
                f"time_step {self.time_step!r} violates the stability limit {limit!r}"
            )

    @property
    def dims(self) -> tuple[int, int, int]:
        nx, nyp, nzp = self.ex.shape
        return nx, nyp - 1, nzp - 1

    def copy(self) -> "FdtdWorkload":
        return FdtdWorkload(
            self.ex.copy(),
            self.ey.copy(),
            self.ez.copy(),
            self.hx.copy(),
            self.hy.copy(),
            self.hz.copy(),
            self.cell_size,
            self.time_step,
        )

    def state_arrays(self) -> tuple[np.ndarray, ...]:
        return (self.ex, self.ey, self.ez, self.hx, self.hy, self.hz)


def fdtd_cavity(
    nx: int, ny: int, nz: int, cell_size: float = 1.0, courant: float = 0.99
) -> FdtdWorkload:
    """Zero-field box of nx*ny*nz cells at the given fraction of the limit."""
    for n in (nx, ny, nz):
        if operator.index(n) < 1:
            raise ValueError("cell counts must be >= 1")
    if not 0.0 < courant <= 1.0:
        raise ValueError(f"courant must be in (0, 1], got {courant!r}")
    dt = courant * cell_size / (VACUUM_LIGHT_SPEED * math.sqrt(3.0))
    return FdtdWorkload(
        ex=np.zeros((nx, ny + 1, nz + 1)),
        ey=np.zeros((nx + 1, ny, nz + 1)),
        ez=np.zeros((nx + 1, ny + 1, nz)),
        hx=np.zeros((nx + 1, ny, nz)),
        hy=np.zeros((nx, ny + 1, nz)),
        hz=np.zeros((nx, ny, nz + 1)),
        cell_size=cell_size,
        time_step=dt,
    )


def te101_cavity(
    nx: int,
    ny: int,
    nz: int,
    cell_size: float = 1.0,
    courant: float = 0.99,
    amplitude: float = 1.0,
) -> FdtdWorkload:
    """Box seeded with the lowest standing mode uniform along y.

    Ey = amplitude * sin(pi*x/Lx) * sin(pi*z/Lz), magnetic fields zero. The
    pattern vanishes on the walls where Ey is tangential, so the seeded state
    already satisfies the conducting-wall condition.
    """
    w = fdtd_cavity(nx, ny, nz, cell_size, courant)
    x_profile = np.sin(np.pi * np.arange(nx + 1) / nx)
    z_profile = np.sin(np.pi * np.arange(nz + 1) / nz)
    # sin(pi) rounds to ~1.2e-16, not zero; ground the wall samples exactly
    x_profile[0] = x_profile[-1] = 0.0
    z_profile[0] = z_profile[-1] = 0.0
    ey = np.empty_like(w.ey)
    ey[:] = amplitude * x_profile[:, None, None] * z_profile[None, None, :]
    return FdtdWorkload(
        w.ex, ey, w.ez, w.hx, w.hy, w.hz, w.cell_size, w.time_step
    )


def fdtd_h_step(w: FdtdWorkload, workers: int | None = None) -> FdtdWorkload:
    """Advance the magnetic field half a step from the curl of E."""
    d = w.cell_size
    c_h = w.time_step / VACUUM_PERMEABILITY
    ex, ey, ez = w.ex, w.ey, w.ez
    hx = np.empty_like(w.hx)
    hy = np.empty_like(w.hy)
    hz = np.empty_like(w.hz)

    def fill_hx(lo, hi):
        hx[lo:hi] = w.hx[lo:hi] + c_h * (
            (ey[lo:hi, :, 1:] - ey[lo:hi, :, :-1]) / d
            - (ez[lo:hi, 1:, :] - ez[lo:hi, :-1, :]) / d
        )

    def fill_hy(lo, hi):
        hy[lo:hi] = w.hy[lo:hi] + c_h * (
            (ez[lo + 1 : hi + 1, :, :] - ez[lo:hi, :, :]) / d
            - (ex[lo:hi, :, 1:] - ex[lo:hi, :, :-1]) / d
        )

    def fill_hz(lo, hi):
        hz[lo:hi] = w.hz[lo:hi] + c_h * (
            (ex[lo:hi, 1:, :] - ex[lo:hi, :-1, :]) / d
            - (ey[lo + 1 : hi + 1, :, :] - ey[lo:hi, :, :]) / d
        )

    _fill_slabs(hx.shape[0], fill_hx, workers)
    _fill_slabs(hy.shape[0], fill_hy, workers)
    _fill_slabs(hz.shape[0], fill_hz, workers)
    return FdtdWorkload(ex, ey, ez, hx, hy, hz, w.cell_size, w.time_step)


def fdtd_e_step(w: FdtdWorkload, workers: int | None = None) -> FdtdWorkload:
    """Advance the electric field a full step from the curl of H.

    Only interior components are updated; tangential E on every wall is
    forced to zero afterwards (perfect electric conductor).
    """
    d = w.cell_size
    c_e = w.time_step / VACUUM_PERMITTIVITY
    hx, hy, hz = w.hx, w.hy, w.hz
    ex = w.ex.copy()
    ey = w.ey.copy()
    ez = w.ez.copy()
    nx, ny, nz = w.dims

    def fill_ex(lo, hi):
        ex[lo:hi, 1:-1, 1:-1] = w.ex[lo:hi, 1:-1, 1:-1] + c_e * (
            (hz[lo:hi, 1:, 1:-1] - hz[lo:hi, :-1, 1:-1]) / d
            - (hy[lo:hi, 1:-1, 1:] - hy[lo:hi, 1:-1, :-1]) / d
        )

    def fill_ey(lo, hi):
        lo_i, hi_i = max(lo, 1), min(hi, nx)
        if lo_i >= hi_i:
            return
        ey[lo_i:hi_i, :, 1:-1] = w.ey[lo_i:hi_i, :, 1:-1] + c_e * (
            (hx[lo_i:hi_i, :, 1:] - hx[lo_i:hi_i, :, :-1]) / d
            - (hz[lo_i:hi_i, :, 1:-1] - hz[lo_i - 1 : hi_i - 1, :, 1:-1]) / d
        )

    def fill_ez(lo, hi):
        lo_i, hi_i = max(lo, 1), min(hi, nx)
        if lo_i >= hi_i:
            return
        ez[lo_i:hi_i, 1:-1, :] = w.ez[lo_i:hi_i, 1:-1, :] + c_e * (
            (hy[lo_i:hi_i, 1:-1, :] - hy[lo_i - 1 : hi_i - 1, 1:-1, :]) / d
            - (hx[lo_i:hi_i, 1:, :] - hx[lo_i:hi_i, :-1, :]) / d
        )

    _fill_slabs(ex.shape[0], fill_ex, workers)
    _fill_slabs(ey.shape[0], fill_ey, workers)
    _fill_slabs(ez.shape[0], fill_ez, workers)

    # conducting walls: tangential E pinned to zero
    ex[:, 0, :] = 0.0
    ex[:, -1, :] = 0.0
    ex[:, :, 0] = 0.0
    ex[:, :, -1] = 0.0
    ey[0, :, :] = 0.0
    ey[-1, :, :] = 0.0
    ey[:, :, 0] = 0.0
    ey[:, :, -1] = 0.0
    ez[0, :, :] = 0.0
    ez[-1, :, :] = 0.0
    ez[:, 0, :] = 0.0
    ez[:, -1, :] = 0.0
    return FdtdWorkload(ex, ey, ez, hx, hy, hz, w.cell_size, w.time_step)


@dataclass(frozen=True)
class ChainProgram:
    """The ordered steps making up one iteration of a workload."""

    steps: tuple

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise ValueError("a chain program needs at least one step")
        object.__setattr__(self, "steps", steps)


def vector_program() -> ChainProgram:
    return ChainProgram((vector_scale_step,))


def hotspot_program() -> ChainProgram:
    return ChainProgram((hotspot_step,))


def fdtd_program() -> ChainProgram:
    # magnetic half-step first, then electric: one full leapfrog iteration
    return ChainProgram((fdtd_h_step, fdtd_e_step))


def run_loop(program: ChainProgram, state, total_iterations: int, workers=None):
    """Apply the program total_iterations times, one iteration at a time."""
    total = operator.index(total_iterations)
    if total < 0:
        raise ValueError("total_iterations must be >= 0")
    for _ in range(total):
        for step in program.steps:
            state = step(state, workers)
    return state


def run_batched(
    program: ChainProgram, state, batch_size: int, num_batches: int, workers=None
):
    """Apply the program in num_batches unrolled chains of batch_size iterations.

    The step sequence is identical to run_loop over batch_size * num_batches
    iterations, so the final state matches it bit for bit.
    """
    size = operator.index(batch_size)
    num = operator.index(num_batches)
    if size < 1:
        raise ValueError("batch_size must be >= 1")
    if num < 0:
        raise ValueError("num_batches must be >= 0")
    for _ in range(num):
        for _ in range(size):
            for step in program.steps:
                state = step(state, workers)
    return state


class ExecutionOrder(Enum):
    LOOP = "loop"
    BATCHED = "batched"


def time_workload(
    program: ChainProgram,
    state,
    plan: BatchPlan,
    order: ExecutionOrder,
    repeats: int = 10,
    workers: int | None = None,
    label: str = "",
) -> MeasurementSeries:
    """Wall-clock the full plan `repeats` times from a fresh state copy.

    The copy happens outside the timed region, so allocation and
    initialization are excluded.
    """
    if operator.index(repeats) < 1:
        raise ValueError("repeats must be >= 1")
    samples = []
    for _ in range(repeats):
        fresh = state.copy()
        t0 = time.perf_counter()
        if order is ExecutionOrder.LOOP:
            run_loop(program, fresh, plan.total_kernel_executions, workers)
        else:
            run_batched(program, fresh, plan.batch_size, plan.num_batches, workers)
        samples.append(time.perf_counter() - t0)
    point = MeasurementPoint(plan.batch_size, tuple(samples))
    return MeasurementSeries((point,), label)


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64_MASK = 0xFFFFFFFFFFFFFFFF


def _fnv1a64(data: bytes, h: int = _FNV_OFFSET) -> int:
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _U64_MASK
    return h


def state_checksum(workload) -> int:
    """64-bit FNV-1a over the canonical little-endian bytes of the state arrays."""
    h = _FNV_OFFSET
    for arr in workload.state_arrays():
        h = _fnv1a64(np.ascontiguousarray(arr, dtype="<f8").tobytes(), h)
    return h
