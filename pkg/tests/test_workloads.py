import numpy as np
import pytest

from iterbatch.model import BatchPlan
from iterbatch.optimize import feasible_batch_sizes
from iterbatch.workloads import (
    ChainProgram,
    ExecutionOrder,
    HotspotWorkload,
    VectorWorkload,
    hotspot_program,
    hotspot_step,
    run_batched,
    run_loop,
    state_checksum,
    time_workload,
    vector_program,
    vector_scale_step,
)


def make_vector(n=64, seed=3, scale=0.5):
    rng = np.random.default_rng(seed)
    return VectorWorkload(rng.random(n), scale)


def make_hotspot2d(shape=(12, 9), seed=7, coeff=0.2):
    rng = np.random.default_rng(seed)
    return HotspotWorkload(rng.random(shape), rng.random(shape) * 1e-3, coeff)


def make_hotspot3d(shape=(6, 5, 4), seed=11, coeff=0.125):
    rng = np.random.default_rng(seed)
    return HotspotWorkload(rng.random(shape), rng.random(shape) * 1e-3, coeff)


# --- vector scaling ---


def test_vector_step_matches_elementwise_product():
    w = make_vector(scale=1.7)
    out = vector_scale_step(w)
    assert np.array_equal(out.values, w.values * 1.7)
    assert out.scale_constant == 1.7


def test_vector_step_leaves_input_untouched():
    w = make_vector()
    before = w.values.copy()
    vector_scale_step(w)
    assert np.array_equal(w.values, before)


def test_vector_identity_scale_is_exact():
    w = make_vector(scale=1.0)
    out = run_loop(vector_program(), w, 10)
    assert np.array_equal(out.values, w.values)


def test_vector_power_of_two_scale_is_exact():
    # each halving is exact in binary floating point
    w = make_vector(scale=0.5)
    out = run_loop(vector_program(), w, 8)
    assert np.array_equal(out.values, w.values * 0.5**8)


def test_vector_general_scale_follows_power_law():
    w = make_vector(scale=3.0)
    out = run_loop(vector_program(), w, 12)
    np.testing.assert_allclose(out.values, w.values * 3.0**12, rtol=1e-12)


def test_vector_rejects_non_1d():
    with pytest.raises(ValueError):
        VectorWorkload(np.ones((2, 2)), 0.5)


# --- hotspot stencil ---


def reference_hotspot_2d(temp, power, coeff):
    rows, cols = temp.shape
    out = np.empty_like(temp)
    for i in range(rows):
        for j in range(cols):
            up = temp[i - 1, j] if i > 0 else temp[i, j]
            down = temp[i + 1, j] if i < rows - 1 else temp[i, j]
            left = temp[i, j - 1] if j > 0 else temp[i, j]
            right = temp[i, j + 1] if j < cols - 1 else temp[i, j]
            neighbors = (up + down) + (left + right)
            out[i, j] = temp[i, j] + coeff * (neighbors - 4.0 * temp[i, j]) + power[i, j]
    return out


def test_hotspot_2d_matches_scalar_reference():
    w = make_hotspot2d()
    out = hotspot_step(w)
    expected = reference_hotspot_2d(w.temperature, w.power, w.diffusion_coefficient)
    np.testing.assert_allclose(out.temperature, expected, rtol=1e-13, atol=0.0)


def test_hotspot_3d_interior_cell_matches_reference():
    w = make_hotspot3d()
    out = hotspot_step(w)
    t = w.temperature
    i, j, k = 2, 2, 2
    neighbors = (t[i - 1, j, k] + t[i + 1, j, k]) + (t[i, j - 1, k] + t[i, j + 1, k]) + (
        t[i, j, k - 1] + t[i, j, k + 1]
    )
    expected = t[i, j, k] + w.diffusion_coefficient * (neighbors - 6.0 * t[i, j, k]) + w.power[i, j, k]
    assert out.temperature[i, j, k] == pytest.approx(expected, rel=1e-13)


def test_hotspot_uniform_field_is_fixed_point():
    # edge cells mirror themselves, so a flat field with no power never moves
    w = HotspotWorkload(np.full((9, 7), 3.25), np.zeros((9, 7)), 0.25)
    out = run_loop(hotspot_program(), w, 5)
    assert np.array_equal(out.temperature, w.temperature)


def test_hotspot_zero_power_respects_maximum_principle():
    w = HotspotWorkload(make_hotspot2d().temperature, np.zeros((12, 9)), 0.25)
    current = w
    for _ in range(10):
        stepped = hotspot_step(current)
        assert stepped.temperature.max() <= current.temperature.max() + 1e-15
        assert stepped.temperature.min() >= current.temperature.min() - 1e-15
        current = stepped


def test_hotspot_2d_preserves_grid_symmetry_exactly():
    # symmetric initial data must stay bitwise symmetric under the stencil
    temp = np.zeros((9, 9))
    temp[4, 4] = 1.0
    temp[2, 4] = temp[6, 4] = 0.25
    temp[4, 2] = temp[4, 6] = 0.25
    w = HotspotWorkload(temp, np.zeros_like(temp), 0.25)
    out = run_loop(hotspot_program(), w, 6)
    assert np.array_equal(out.temperature, out.temperature[::-1, :])
    assert np.array_equal(out.temperature, out.temperature[:, ::-1])
    assert np.array_equal(out.temperature, out.temperature.T)


def test_hotspot_3d_preserves_grid_symmetry_exactly():
    temp = np.zeros((7, 7, 7))
    temp[3, 3, 3] = 1.0
    w = HotspotWorkload(temp, np.zeros_like(temp), 1.0 / 6.0)
    out = run_loop(hotspot_program(), w, 4)
    for axis in range(3):
        assert np.array_equal(out.temperature, np.flip(out.temperature, axis=axis))
    assert np.array_equal(out.temperature, out.temperature.transpose(1, 0, 2))


def test_hotspot_energy_budget_with_insulated_edges():
    # adiabatic edges conserve the total heat added by the power term
    w = make_hotspot2d(coeff=0.25)
    out = run_loop(hotspot_program(), w, 8)
    expected_total = w.temperature.sum() + 8 * w.power.sum()
    assert out.temperature.sum() == pytest.approx(expected_total, rel=1e-12)


def test_hotspot_stability_bound_enforced():
    ok2 = HotspotWorkload(np.zeros((4, 4)), np.zeros((4, 4)), 0.25)
    assert ok2.diffusion_coefficient == 0.25
    with pytest.raises(ValueError, match="stable range"):
        HotspotWorkload(np.zeros((4, 4)), np.zeros((4, 4)), 0.26)
    ok3 = HotspotWorkload(np.zeros((4, 4, 4)), np.zeros((4, 4, 4)), 1.0 / 6.0)
    assert ok3.diffusion_coefficient == pytest.approx(1.0 / 6.0)
    with pytest.raises(ValueError, match="stable range"):
        HotspotWorkload(np.zeros((4, 4, 4)), np.zeros((4, 4, 4)), 0.18)


def test_hotspot_rejects_shape_mismatch_and_bad_rank():
    with pytest.raises(ValueError, match="shape"):
        HotspotWorkload(np.zeros((4, 4)), np.zeros((4, 5)), 0.2)
    with pytest.raises(ValueError, match="2-D or 3-D"):
        HotspotWorkload(np.zeros(16), np.zeros(16), 0.2)


def test_hotspot_step_leaves_input_untouched():
    w = make_hotspot2d()
    before = w.temperature.copy()
    hotspot_step(w)
    assert np.array_equal(w.temperature, before)


# --- chain programs and execution orders ---


def test_chain_program_requires_steps():
    with pytest.raises(ValueError):
        ChainProgram(())


def test_vector_program_has_single_step():
    assert vector_program().steps == (vector_scale_step,)


def test_run_loop_zero_iterations_returns_equivalent_state():
    w = make_vector()
    out = run_loop(vector_program(), w, 0)
    assert state_checksum(out) == state_checksum(w)


def test_run_loop_rejects_negative_iterations():
    with pytest.raises(ValueError):
        run_loop(vector_program(), make_vector(), -1)


def test_run_batched_validates_plan_shape():
    w = make_vector()
    with pytest.raises(ValueError):
        run_batched(vector_program(), w, 0, 5)
    out = run_batched(vector_program(), w, 3, 0)
    assert state_checksum(out) == state_checksum(w)


def test_loop_and_batched_agree_on_vector():
    w = make_vector(n=1000, scale=0.9999)
    reference = state_checksum(run_loop(vector_program(), w, 60))
    for size in feasible_batch_sizes(60):
        got = state_checksum(run_batched(vector_program(), w, size, 60 // size))
        assert got == reference


def test_loop_and_batched_agree_on_hotspot():
    w = make_hotspot2d()
    reference = state_checksum(run_loop(hotspot_program(), w, 12))
    for size in feasible_batch_sizes(12):
        got = state_checksum(run_batched(hotspot_program(), w, size, 12 // size))
        assert got == reference


def test_worker_count_does_not_change_results():
    for workers in (1, 2, 3, 5):
        v = run_loop(vector_program(), make_vector(n=257), 7, workers=workers)
        assert state_checksum(v) == state_checksum(
            run_loop(vector_program(), make_vector(n=257), 7)
        )
        h = run_loop(hotspot_program(), make_hotspot2d(), 5, workers=workers)
        assert state_checksum(h) == state_checksum(
            run_loop(hotspot_program(), make_hotspot2d(), 5)
        )


# --- state checksums ---


def test_checksum_is_deterministic_and_order_sensitive():
    w = make_vector()
    assert state_checksum(w) == state_checksum(make_vector())
    flipped = VectorWorkload(w.values[::-1].copy(), w.scale_constant)
    assert state_checksum(flipped) != state_checksum(w)


def test_checksum_detects_single_value_change():
    w = make_vector()
    values = w.values.copy()
    values[17] = np.nextafter(values[17], 1.0)
    assert state_checksum(VectorWorkload(values, w.scale_constant)) != state_checksum(w)


def test_checksum_covers_all_hotspot_arrays():
    w = make_hotspot2d()
    power = w.power.copy()
    power[0, 0] += 1e-9
    other = HotspotWorkload(w.temperature, power, w.diffusion_coefficient)
    assert state_checksum(other) != state_checksum(w)


def test_checksum_independent_of_memory_layout():
    w = make_hotspot2d()
    fortran = HotspotWorkload(
        np.asfortranarray(w.temperature), w.power, w.diffusion_coefficient
    )
    assert state_checksum(fortran) == state_checksum(w)


# --- wall-clock measurement ---


def test_time_workload_returns_single_point_series():
    w = make_vector(n=32)
    plan = BatchPlan(6, 2, 3)
    series = time_workload(
        vector_program(), w, plan, ExecutionOrder.BATCHED, repeats=4, label="demo"
    )
    assert series.label == "demo"
    assert len(series.points) == 1
    point = series.points[0]
    assert point.batch_size == 2
    assert len(point.samples) == 4
    assert all(s > 0.0 for s in point.samples)


def test_time_workload_loop_order_uses_whole_count():
    w = make_vector(n=32)
    plan = BatchPlan(6, 2, 3)
    series = time_workload(vector_program(), w, plan, ExecutionOrder.LOOP, repeats=2)
    assert series.points[0].batch_size == 2


def test_execution_order_values():
    assert ExecutionOrder.LOOP.value == "loop"
    assert ExecutionOrder.BATCHED.value == "batched"
