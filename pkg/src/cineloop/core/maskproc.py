"""
Static/dynamic segmentation masks and their refinement.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import ndimage

from .errors import DimensionError
from .logger import get_logger
from .pyramid import ImageRGB

logger = get_logger('maskproc')

# 4-connectivity
_CROSS = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True, eq=False)
class Mask:
    """Binary (height, width) grid, 1 = dynamic, 0 = static."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"mask must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("mask values must be 0 or 1")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, 'data', arr)

    @classmethod
    def full(cls, width: int, height: int, value: int = 1) -> 'Mask':
        return cls(np.full((height, width), value, dtype=np.uint8))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def as_float(self) -> np.ndarray:
        return self.data.astype(np.float64)


def mask_area_ratio(mask: Mask) -> float:
    """Fraction of dynamic pixels."""
    return float(mask.data.mean())


def resize_mask(mask: Mask, width: int, height: int) -> Mask:
    """Nearest-neighbour resampling on pixel centres."""
    if (width, height) == (mask.width, mask.height):
        return mask
    rows = np.minimum(((np.arange(height) + 0.5) * mask.height / height).astype(np.intp), mask.height - 1)
    cols = np.minimum(((np.arange(width) + 0.5) * mask.width / width).astype(np.intp), mask.width - 1)
    return Mask(mask.data[rows[:, None], cols[None, :]])


def _small_components(binary: np.ndarray, limit: float):
    labels, count = ndimage.label(binary, structure=_CROSS)
    if count == 0:
        return labels, np.zeros(0, dtype=bool)
    areas = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    return labels, areas < limit


def refine_mask(mask: Mask, area_ratio_threshold: float = 0.03) -> Mask:
    """Remove connected regions smaller than a fraction of the image.

    Components of either label whose area over the total area is below
    the threshold take the label that surrounds them. A small component
    whose every neighbour is itself being flipped keeps its label, since
    it merges with its flipped surroundings either way.

    Args:
        mask: Mask to clean up
        area_ratio_threshold: Area fraction in (0, 1), default 3%

    Returns:
        Refined binary mask of the same size
    """
    if not 0.0 < area_ratio_threshold < 1.0:
        raise ValueError(f"area ratio threshold must be in (0, 1), got {area_ratio_threshold}")

    total = mask.data.size
    limit = area_ratio_threshold * total
    dynamic = mask.data.astype(bool)

    dyn_labels, dyn_small = _small_components(dynamic, limit)
    sta_labels, sta_small = _small_components(~dynamic, limit)

    # flipping[y, x] is True when the pixel belongs to a sub-threshold component
    flipping = np.zeros_like(dynamic)
    if dyn_small.any():
        flipping |= np.concatenate(([False], dyn_small))[dyn_labels]
    if sta_small.any():
        flipping |= np.concatenate(([False], sta_small))[sta_labels]

    if not flipping.any():
        return mask

    result = mask.data.copy()
    flipped = 0
    for labels, small in ((dyn_labels, dyn_small), (sta_labels, sta_small)):
        for index, region in enumerate(ndimage.find_objects(labels), start=1):
            if region is None or not small[index - 1]:
                continue
            rows, cols = region
            window = (
                slice(max(rows.start - 1, 0), rows.stop + 1),
                slice(max(cols.start - 1, 0), cols.stop + 1),
            )
            component = labels[window] == index
            ring = ndimage.binary_dilation(component, structure=_CROSS) & ~component
            if ring.any() and flipping[window][ring].all():
                continue
            result[window][component] ^= 1
            flipped += int(component.sum())

    logger.debug(f"Refined mask: flipped {flipped} of {total} pixels")
    return Mask(result)


def threshold_mask(image: ImageRGB, channel: int, cutoff: float) -> Mask:
    """Mask of pixels whose selected channel exceeds the cutoff."""
    if not 0 <= channel < image.channels:
        raise ValueError(f"channel index {channel} out of range for {image.channels} channels")
    if not 0.0 <= cutoff <= 1.0:
        raise ValueError(f"cutoff must be in [0, 1], got {cutoff}")
    return Mask((image.data[:, :, channel] > cutoff).astype(np.uint8))
