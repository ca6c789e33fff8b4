"""
Eulerian motion fields and cumulative displacement fields.

A FlowField holds per-pixel velocity in pixels/frame (u rightward,
v downward). Euler integration of a flow gives a DisplacementField that
carries every source pixel x0 to its position at time t.
"""

from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from .errors import DegenerateMotionError, DimensionError, ShapeMismatchError
from .logger import get_logger
from .maskproc import Mask

logger = get_logger('field')


def _vector_grid(data, dtype) -> np.ndarray:
    arr = np.asarray(data)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"vector field must be (height, width, 2), got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("vector field holds non-finite values")
    arr = np.array(arr, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


class _VectorGrid:
    data: np.ndarray

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width


@dataclass(frozen=True, eq=False)
class FlowField(_VectorGrid):
    """Instantaneous velocity per pixel, stored as float32 like .flo files."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'data', _vector_grid(self.data, np.float32))

    @classmethod
    def zeros(cls, width: int, height: int) -> 'FlowField':
        return cls(np.zeros((height, width, 2), dtype=np.float32))


@dataclass(frozen=True, eq=False)
class DisplacementField(_VectorGrid):
    """Cumulative displacement of each source pixel, in this field's pixels.

    base_width/base_height record the resolution the displacement was
    integrated at; they default to the field's own size.
    """

    data: np.ndarray
    base_width: Optional[int] = None
    base_height: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'data', _vector_grid(self.data, np.float64))
        if self.base_width is None:
            object.__setattr__(self, 'base_width', self.width)
        if self.base_height is None:
            object.__setattr__(self, 'base_height', self.height)

    @classmethod
    def zeros(cls, width: int, height: int) -> 'DisplacementField':
        return cls(np.zeros((height, width, 2), dtype=np.float64))

    def is_zero(self) -> bool:
        return not self.data.any()


@dataclass(frozen=True)
class LoopSpec:
    """A loop of frame_count + 1 frames, indices 0..frame_count."""

    frame_count: int

    def __post_init__(self):
        if isinstance(self.frame_count, bool) or int(self.frame_count) != self.frame_count or self.frame_count < 1:
            raise ValueError(f"frame count N must be an integer >= 1, got {self.frame_count}")

    @property
    def frames(self) -> int:
        return self.frame_count + 1

    def check(self, t: int) -> None:
        if not 0 <= t <= self.frame_count:
            raise ValueError(f"frame index t={t} outside [0, {self.frame_count}]")

    def alpha(self, t: int) -> float:
        """Looping weight 1 - t/N."""
        self.check(t)
        return 1.0 - t / self.frame_count


def sample_positions(grid: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinearly sample a (height, width, 2) grid at arrays of positions.

    Positions are clamped to [0, W-1] x [0, H-1] before interpolation.
    """
    height, width = grid.shape[:2]
    coords = np.stack([
        np.clip(ys, 0.0, height - 1),
        np.clip(xs, 0.0, width - 1),
    ])
    return np.stack([
        ndimage.map_coordinates(grid[:, :, c].astype(np.float64, copy=False), coords, order=1, mode='nearest')
        for c in range(grid.shape[2])
    ], axis=-1)


def sample_bilinear(field: _VectorGrid, x: float, y: float) -> Tuple[float, float]:
    """Sample a flow or displacement field at a continuous position."""
    u, v = sample_positions(field.data, np.array([x], dtype=np.float64), np.array([y], dtype=np.float64))[0]
    return float(u), float(v)


def negate(flow: FlowField) -> FlowField:
    return FlowField(-flow.data)


def iter_displacements(flow: FlowField, steps: int) -> Iterator[DisplacementField]:
    """Yield F_{0->0} .. F_{0->steps} of one Euler integration.

    F_{0->t}(x0) = F_{0->t-1}(x0) + M(x0 + F_{0->t-1}(x0))
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")

    height, width = flow.shape
    velocity = flow.data.astype(np.float64)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    disp = np.zeros((height, width, 2), dtype=np.float64)

    yield DisplacementField(disp)
    for _ in range(steps):
        disp = disp + sample_positions(velocity, xs + disp[:, :, 0], ys + disp[:, :, 1])
        yield DisplacementField(disp)


def displacement_sequence(flow: FlowField, steps: int) -> List[DisplacementField]:
    """All displacements F_{0->0} .. F_{0->steps}."""
    fields = list(iter_displacements(flow, steps))
    logger.debug(f"Integrated {flow.width}x{flow.height} flow for {steps} steps")
    return fields


def integrate(flow: FlowField, steps: int) -> DisplacementField:
    """Euler-integrate a motion field for a number of frames."""
    field = None
    for field in iter_displacements(flow, steps):
        pass
    return field


def loop_displacements(flow: FlowField, spec: LoopSpec, t: int) -> Tuple[DisplacementField, DisplacementField]:
    """Future and past displacement fields for frame t of a loop.

    Returns:
        (F_{0->t}, F_{N->t}) where the second integrates -M for N - t steps
    """
    spec.check(t)
    return integrate(flow, t), integrate(negate(flow), spec.frame_count - t)


def _check_mask(flow: FlowField, mask: Mask) -> None:
    if flow.shape != mask.shape:
        raise ShapeMismatchError(
            f"flow is {flow.width}x{flow.height} but mask is {mask.width}x{mask.height}"
        )


def apply_mask(flow: FlowField, mask: Mask) -> FlowField:
    """Zero the motion of static pixels."""
    _check_mask(flow, mask)
    return FlowField(flow.data * mask.data[:, :, None].astype(np.float32))


def mean_speed(flow: FlowField, mask: Mask) -> float:
    """Mean Euclidean magnitude over dynamic pixels (0 when there are none)."""
    _check_mask(flow, mask)
    dynamic = mask.data.astype(bool)
    if not dynamic.any():
        return 0.0
    magnitude = np.hypot(flow.data[:, :, 0].astype(np.float64), flow.data[:, :, 1].astype(np.float64))
    return float(magnitude[dynamic].mean())


def normalize_speed(flow: FlowField, mask: Mask, target_mean_magnitude: float) -> FlowField:
    """Rescale a flow so its mean dynamic-pixel speed hits a target."""
    if not target_mean_magnitude > 0:
        raise ValueError(f"target mean magnitude must be > 0, got {target_mean_magnitude}")
    current = mean_speed(flow, mask)
    if current == 0.0:
        raise DegenerateMotionError("degenerate motion field")
    scale = target_mean_magnitude / current
    logger.debug(f"Speed normalization: mean {current:.6g} px/frame, scale {scale:.6g}")
    return FlowField(flow.data.astype(np.float64) * scale)
