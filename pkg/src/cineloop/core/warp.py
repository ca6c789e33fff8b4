"""
Forward warping of feature maps.

Bilinear splatting scatters each source feature onto the four grid cells
around its displaced position. Joint splatting runs the future and past
displacements with looping weights alpha and 1 - alpha and normalizes
both directions together, so frames 0 and N of a loop coincide. Cells
that receive no weight are holes and are filled from their neighbours.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .errors import HoleFillError, ShapeMismatchError
from .field import DisplacementField
from .logger import get_logger
from .pyramid import FeatureMap, FeaturePyramid

logger = get_logger('warp')

HOLE_EPSILON = 1e-8
MEDIAN_KERNEL = 7
SMOOTHING_SWEEPS = 20


@dataclass(frozen=True, eq=False)
class SplatAccumulator:
    """Weighted feature sums and total splat weight per destination cell."""

    features: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.features.shape[:2] != self.weights.shape:
            raise ShapeMismatchError("accumulator features and weights disagree on size")
        if (self.weights < 0).any():
            raise ValueError("splat weights must be non-negative")

    def merged(self, other: 'SplatAccumulator') -> 'SplatAccumulator':
        return SplatAccumulator(self.features + other.features, self.weights + other.weights)


@dataclass(frozen=True, eq=False)
class HoleMask:
    """Binary (height, width) grid, 1 = missing value."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2 or not np.isin(arr, (0, 1)).all():
            raise ValueError("hole mask must be a binary 2-D grid")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, 'data', arr)

    @property
    def count(self) -> int:
        return int(self.data.sum())


def rescale_displacement(field: DisplacementField, target_w: int, target_h: int) -> DisplacementField:
    """Resize a displacement field and rescale its values to the new pixel size.

    Both channels are resized bilinearly on pixel centres, then u is
    multiplied by target_w / width and v by target_h / height.
    """
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target size must be positive, got {target_w}x{target_h}")
    if (target_w, target_h) == (field.width, field.height):
        return field

    scale_u = target_w / field.width
    scale_v = target_h / field.height
    ys = (np.arange(target_h, dtype=np.float64) + 0.5) / scale_v - 0.5
    xs = (np.arange(target_w, dtype=np.float64) + 0.5) / scale_u - 0.5
    grid_y, grid_x = np.meshgrid(
        np.clip(ys, 0.0, field.height - 1), np.clip(xs, 0.0, field.width - 1), indexing='ij'
    )
    coords = np.stack([grid_y, grid_x])
    u = ndimage.map_coordinates(field.data[:, :, 0], coords, order=1, mode='nearest') * scale_u
    v = ndimage.map_coordinates(field.data[:, :, 1], coords, order=1, mode='nearest') * scale_v
    return DisplacementField(np.stack([u, v], axis=-1), field.base_width, field.base_height)


def _check_shapes(features: FeatureMap, *fields: DisplacementField) -> None:
    for field in fields:
        if field.shape != features.shape:
            raise ShapeMismatchError(
                f"feature map is {features.width}x{features.height} "
                f"but displacement is {field.width}x{field.height}"
            )


def splat(features: FeatureMap, field: DisplacementField, weight_scale: float = 1.0) -> SplatAccumulator:
    """Bilinearly splat every source feature to its displaced position.

    Contributions landing outside the grid are dropped.
    """
    _check_shapes(features, field)
    if weight_scale < 0:
        raise ValueError(f"weight scale must be >= 0, got {weight_scale}")

    height, width, channels = features.data.shape
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    dest_x = (xs + field.data[:, :, 0]).ravel()
    dest_y = (ys + field.data[:, :, 1]).ravel()
    x0 = np.floor(dest_x)
    y0 = np.floor(dest_y)
    fx = dest_x - x0
    fy = dest_y - y0
    x0 = x0.astype(np.intp)
    y0 = y0.astype(np.intp)
    source = features.data.reshape(-1, channels)

    size = height * width
    weights = np.zeros(size, dtype=np.float64)
    sums = np.zeros((size, channels), dtype=np.float64)
    corners = (
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x0 + 1, y0, fx * (1.0 - fy)),
        (x0, y0 + 1, (1.0 - fx) * fy),
        (x0 + 1, y0 + 1, fx * fy),
    )
    for cx, cy, bilinear in corners:
        inside = (cx >= 0) & (cx < width) & (cy >= 0) & (cy < height)
        index = cy[inside] * width + cx[inside]
        w = bilinear[inside] * weight_scale
        weights += np.bincount(index, weights=w, minlength=size)
        for c in range(channels):
            sums[:, c] += np.bincount(index, weights=w * source[inside, c], minlength=size)

    return SplatAccumulator(sums.reshape(height, width, channels), weights.reshape(height, width))


def normalize(acc: SplatAccumulator, epsilon: float = HOLE_EPSILON) -> Tuple[FeatureMap, HoleMask]:
    """Divide sums by weights; cells below epsilon become zero-valued holes."""
    holes = acc.weights < epsilon
    safe = np.where(holes, 1.0, acc.weights)
    out = np.where(holes[:, :, None], 0.0, acc.features / safe[:, :, None])
    return FeatureMap(out), HoleMask(holes.astype(np.uint8))


def joint_splat(
    features: FeatureMap,
    f_fwd: DisplacementField,
    f_bwd: DisplacementField,
    alpha_t: float,
    epsilon: float = HOLE_EPSILON,
) -> Tuple[FeatureMap, HoleMask]:
    """Splat along the future and past displacements and normalize jointly.

    D_t = (alpha * fwd_sums + (1 - alpha) * bwd_sums)
          / (alpha * fwd_weights + (1 - alpha) * bwd_weights)
    """
    _check_shapes(features, f_fwd, f_bwd)
    if not 0.0 <= alpha_t <= 1.0:
        raise ValueError(f"looping weight must be in [0, 1], got {alpha_t}")
    forward = splat(features, f_fwd, alpha_t)
    backward = splat(features, f_bwd, 1.0 - alpha_t)
    return normalize(forward.merged(backward), epsilon)


def _neighbour_sums(values: np.ndarray, known: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """4-neighbour sums of known values and the count of known neighbours."""
    masked = np.pad(values * known[:, :, None], ((1, 1), (1, 1), (0, 0)))
    counts = np.pad(known.astype(np.float64), 1)
    sums = masked[:-2, 1:-1] + masked[2:, 1:-1] + masked[1:-1, :-2] + masked[1:-1, 2:]
    count = counts[:-2, 1:-1] + counts[2:, 1:-1] + counts[1:-1, :-2] + counts[1:-1, 2:]
    return sums, count


def _diffuse(values: np.ndarray, holes: np.ndarray, sweeps: int = SMOOTHING_SWEEPS) -> np.ndarray:
    """Inpaint holes by growing averages of known neighbours inward, then smooth them."""
    known = ~holes
    while not known.all():
        sums, count = _neighbour_sums(values, known)
        front = ~known & (count > 0)
        if not front.any():
            raise HoleFillError("nothing to fill from")
        values[front] = sums[front] / count[front][:, None]
        known |= front

    everywhere = np.ones_like(known)
    for _ in range(sweeps):
        sums, count = _neighbour_sums(values, everywhere)
        values[holes] = sums[holes] / count[holes][:, None]
    return values


def _median_pass(values: np.ndarray, holes: np.ndarray, kernel: int):
    """Median of the known values in each hole pixel's window.

    Every hole is evaluated against the map as it stood at the start of
    the pass. Returns the hole coordinates that had known neighbours and
    their per-channel medians.
    """
    radius = kernel // 2
    known = np.where(holes[:, :, None], np.nan, values)
    padded = np.pad(known, ((radius, radius), (radius, radius), (0, 0)), constant_values=np.nan)
    windows = sliding_window_view(padded, (kernel, kernel), axis=(0, 1))

    ys, xs = np.nonzero(holes)
    patches = windows[ys, xs].reshape(len(ys), values.shape[2], kernel * kernel)
    resolvable = np.isfinite(patches[:, 0, :]).any(axis=1)
    if not resolvable.any():
        return ys[:0], xs[:0], np.empty((0, values.shape[2]))
    medians = np.nanmedian(patches[resolvable], axis=2)
    return ys[resolvable], xs[resolvable], medians


def fill_holes(
    features: FeatureMap,
    holes: HoleMask,
    large_hole_ratio: float = 0.03,
    kernel: int = MEDIAN_KERNEL,
) -> FeatureMap:
    """Fill missing cells of a warped feature map.

    When holes cover at least large_hole_ratio of the map they are
    inpainted by diffusion. Otherwise each hole takes the median of the
    known values in its kernel x kernel window; holes with no known value
    in reach wait for a later pass. Known cells are never modified.
    """
    if holes.data.shape != features.shape:
        raise ShapeMismatchError("hole mask and feature map disagree on size")
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"median kernel must be a positive odd size, got {kernel}")
    missing = holes.data.astype(bool)
    if not missing.any():
        return features
    if missing.all():
        raise HoleFillError("nothing to fill from")

    values = np.array(features.data, copy=True)
    if missing.sum() >= large_hole_ratio * missing.size:
        logger.debug(f"Inpainting {int(missing.sum())} hole pixels by diffusion")
        return FeatureMap(_diffuse(values, missing))

    remaining = missing.copy()
    while remaining.any():
        ys, xs, medians = _median_pass(values, remaining, kernel)
        if len(ys) == 0:
            logger.warning(f"Median fill stalled with {int(remaining.sum())} holes left, diffusing")
            values = _diffuse(values, remaining)
            break
        values[ys, xs] = medians
        remaining[ys, xs] = False

    return FeatureMap(values)


def warp_level(
    features: FeatureMap,
    f_fwd: DisplacementField,
    f_bwd: DisplacementField,
    alpha_t: float,
    large_hole_ratio: float = 0.03,
    kernel: int = MEDIAN_KERNEL,
    epsilon: float = HOLE_EPSILON,
) -> FeatureMap:
    """Joint-splat one feature map, rescaling the displacements to its size."""
    fwd = rescale_displacement(f_fwd, features.width, features.height)
    bwd = rescale_displacement(f_bwd, features.width, features.height)
    warped, holes = joint_splat(features, fwd, bwd, alpha_t, epsilon)
    return fill_holes(warped, holes, large_hole_ratio, kernel)


def warp_pyramid(
    pyramid: FeaturePyramid,
    f_fwd: DisplacementField,
    f_bwd: DisplacementField,
    alpha_t: float,
    large_hole_ratio: float = 0.03,
    kernel: int = MEDIAN_KERNEL,
    epsilon: float = HOLE_EPSILON,
) -> FeaturePyramid:
    """Multi-scale warp: joint splatting and hole filling at every level."""
    return FeaturePyramid(tuple(
        warp_level(level, f_fwd, f_bwd, alpha_t, large_hole_ratio, kernel, epsilon) for level in pyramid.levels
    ))
