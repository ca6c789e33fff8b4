import math

import numpy as np
import pytest

from cineloop.core.errors import DegenerateMotionError, DimensionError, ShapeMismatchError
from cineloop.core.field import (
    DisplacementField, FlowField, LoopSpec, apply_mask, displacement_sequence, integrate,
    loop_displacements, mean_speed, negate, normalize_speed, sample_bilinear,
)
from cineloop.core.flowsynth import constant_flow
from cineloop.core.maskproc import Mask


def oracle_bilinear(grid, xs, ys):
    """Clamped bilinear lookup from the four corner cells, one position per pixel."""
    height, width = grid.shape[:2]
    xs = np.clip(xs, 0.0, width - 1)
    ys = np.clip(ys, 0.0, height - 1)
    x0, y0 = np.floor(xs).astype(int), np.floor(ys).astype(int)
    x1, y1 = np.minimum(x0 + 1, width - 1), np.minimum(y0 + 1, height - 1)
    fx, fy = (xs - x0)[..., None], (ys - y0)[..., None]
    return (
        grid[y0, x0] * (1 - fx) * (1 - fy) + grid[y0, x1] * fx * (1 - fy)
        + grid[y1, x0] * (1 - fx) * fy + grid[y1, x1] * fx * fy
    )


def oracle_integrate(flow, steps):
    """x_k = x_{k-1} + M(x_{k-1}) per pixel, starting from the pixel centre."""
    grid = flow.astype(np.float64)
    height, width = grid.shape[:2]
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    px, py = xs.copy(), ys.copy()
    for _ in range(steps):
        step = oracle_bilinear(grid, px, py)
        px, py = px + step[..., 0], py + step[..., 1]
    return np.stack([px - xs, py - ys], axis=-1)


def test_integrate_matches_per_pixel_oracle(rng):
    for _ in range(200):
        width, height = rng.integers(8, 33, size=2)
        data = rng.uniform(-1.4, 1.4, size=(height, width, 2)).astype(np.float32)
        steps = int(rng.integers(0, 21))
        result = integrate(FlowField(data), steps)
        np.testing.assert_allclose(result.data, oracle_integrate(data, steps), atol=1e-5)


def test_integrate_zero_steps_is_zero(rng):
    flow = FlowField(rng.uniform(-2, 2, size=(6, 5, 2)))
    assert integrate(flow, 0).is_zero()


@pytest.mark.parametrize('t', [1, 7, 100])
def test_constant_flow_closed_form(t):
    result = integrate(constant_flow(16, 12, 0.5, -0.25), t)
    np.testing.assert_allclose(result.data[:, :, 0], 0.5 * t, atol=1e-6)
    np.testing.assert_allclose(result.data[:, :, 1], -0.25 * t, atol=1e-6)


def test_displacement_sequence_is_prefix_consistent(rng):
    flow = FlowField(rng.uniform(-1, 1, size=(10, 10, 2)))
    sequence = displacement_sequence(flow, 6)
    assert len(sequence) == 7
    assert sequence[0].is_zero()
    for t in (1, 4, 6):
        np.testing.assert_array_equal(sequence[t].data, integrate(flow, t).data)


def test_loop_displacements_ends():
    flow = constant_flow(8, 8, 1.0, 0.0)
    spec = LoopSpec(4)
    fwd, bwd = loop_displacements(flow, spec, 0)
    assert fwd.is_zero()
    np.testing.assert_allclose(bwd.data[:, :, 0], -4.0)
    fwd, bwd = loop_displacements(flow, spec, 4)
    assert bwd.is_zero()
    np.testing.assert_allclose(fwd.data[:, :, 0], 4.0)


def test_loop_displacements_rejects_bad_t():
    with pytest.raises(ValueError):
        loop_displacements(constant_flow(4, 4, 1, 0), LoopSpec(3), 4)
    with pytest.raises(ValueError):
        loop_displacements(constant_flow(4, 4, 1, 0), LoopSpec(3), -1)


def test_loop_spec_alpha_and_validation():
    spec = LoopSpec(8)
    assert spec.frames == 9
    assert spec.alpha(0) == 1.0
    assert spec.alpha(8) == 0.0
    assert spec.alpha(2) == pytest.approx(0.75)
    for bad in (0, -2, 2.5):
        with pytest.raises(ValueError):
            LoopSpec(bad)


def test_sample_bilinear_clamps_outside():
    data = np.zeros((4, 4, 2))
    data[:, :, 0] = np.arange(4)[None, :]
    flow = FlowField(data)
    assert sample_bilinear(flow, 1.5, 2.0) == pytest.approx((1.5, 0.0))
    assert sample_bilinear(flow, -10.0, 2.0) == pytest.approx((0.0, 0.0))
    assert sample_bilinear(flow, 10.0, 2.0) == pytest.approx((3.0, 0.0))


def test_vector_fields_reject_bad_shapes():
    with pytest.raises(DimensionError):
        FlowField(np.zeros((4, 4, 3)))
    with pytest.raises(DimensionError):
        DisplacementField(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        FlowField(np.full((2, 2, 2), np.nan))


def test_negate():
    flow = constant_flow(3, 3, 1.0, -2.0)
    np.testing.assert_array_equal(negate(flow).data, -flow.data)


def test_apply_mask_zeroes_static_pixels(rng):
    flow = FlowField(rng.uniform(-1, 1, size=(6, 6, 2)))
    mask_data = np.zeros((6, 6), dtype=np.uint8)
    mask_data[2:4, 1:5] = 1
    masked = apply_mask(flow, Mask(mask_data))
    assert not masked.data[mask_data == 0].any()
    np.testing.assert_array_equal(masked.data[mask_data == 1], flow.data[mask_data == 1])


def test_apply_mask_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        apply_mask(FlowField.zeros(4, 4), Mask.full(5, 4))


def test_normalize_speed_hits_target():
    data = np.zeros((4, 4, 2))
    data[:2, :, 0] = 3.0
    data[:2, :, 1] = 4.0
    data[2:, :, 0] = 1.0
    mask = Mask.full(4, 4)
    assert mean_speed(FlowField(data), mask) == pytest.approx(3.0)
    scaled = normalize_speed(FlowField(data), mask, 1.5)
    assert mean_speed(scaled, mask) == pytest.approx(1.5, abs=1e-6)


def test_normalize_speed_unchanged_at_current_speed():
    flow = constant_flow(5, 5, 3.0, 4.0)
    scaled = normalize_speed(flow, Mask.full(5, 5), 5.0)
    np.testing.assert_allclose(scaled.data, flow.data, atol=1e-9)


def test_normalize_speed_ignores_static_pixels():
    data = np.zeros((4, 4, 2))
    data[0, 0] = (2.0, 0.0)
    mask_data = np.zeros((4, 4), dtype=np.uint8)
    mask_data[0, 0] = 1
    scaled = normalize_speed(FlowField(data), Mask(mask_data), 1.0)
    assert scaled.data[0, 0, 0] == pytest.approx(1.0)


def test_normalize_speed_degenerate():
    with pytest.raises(DegenerateMotionError, match="degenerate motion field"):
        normalize_speed(FlowField.zeros(4, 4), Mask.full(4, 4), 1.0)
    with pytest.raises(DegenerateMotionError):
        normalize_speed(constant_flow(4, 4, 1, 0), Mask.full(4, 4, 0), 1.0)
    with pytest.raises(ValueError):
        normalize_speed(constant_flow(4, 4, 1, 0), Mask.full(4, 4), 0.0)


def test_sample_bilinear_cell_average():
    data = np.zeros((2, 2, 2))
    data[:, :, 0] = [[0.0, 2.0], [4.0, 6.0]]
    assert sample_bilinear(FlowField(data), 0.5, 0.5) == pytest.approx((3.0, 0.0))
    assert sample_bilinear(FlowField(data), 1.0, 0.0) == (2.0, 0.0)


def test_loop_displacements_constant_closed_form():
    fwd, bwd = loop_displacements(constant_flow(6, 6, 2.0, 0.0), LoopSpec(4), 1)
    np.testing.assert_allclose(fwd.data, np.broadcast_to([2.0, 0.0], (6, 6, 2)))
    np.testing.assert_allclose(bwd.data, np.broadcast_to([-6.0, 0.0], (6, 6, 2)))


def test_apply_mask_is_idempotent(rng):
    flow = FlowField(rng.uniform(-1, 1, size=(5, 5, 2)))
    mask = Mask((rng.random((5, 5)) > 0.5).astype(np.uint8))
    once = apply_mask(flow, mask)
    np.testing.assert_array_equal(apply_mask(once, mask).data, once.data)
