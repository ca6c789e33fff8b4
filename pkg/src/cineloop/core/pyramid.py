"""
Invertible multi-scale feature representation.

A Laplacian pyramid stands in for the deep features a generator would
warp: `analyze` splits an image into band-pass residuals over a Gaussian
base and `synthesize` rebuilds it exactly. Level 0 is the coarsest.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import ndimage

from .errors import DimensionError
from .logger import get_logger

logger = get_logger('pyramid')

# Burt-Adelson binomial kernel; mirror padding is reflect-101
_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def _frozen(data: np.ndarray, dtype) -> np.ndarray:
    arr = np.array(data, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """A (height, width, channels) grid of real features."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise DimensionError(f"feature map must be (height, width, channels), got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("feature map holds non-finite values")
        object.__setattr__(self, 'data', _frozen(arr, np.float64))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width


@dataclass(frozen=True, eq=False)
class ImageRGB(FeatureMap):
    """A three-channel image with values nominally in [0, 1].

    Signed images (colour deltas) use the same type.
    """

    def __post_init__(self):
        super().__post_init__()
        if self.channels != 3:
            raise DimensionError(f"RGB image needs 3 channels, got {self.channels}")

    @classmethod
    def constant(cls, width: int, height: int, value) -> 'ImageRGB':
        return cls(np.broadcast_to(np.asarray(value, dtype=np.float64), (height, width, 3)))

    def clipped(self) -> 'ImageRGB':
        return ImageRGB(np.clip(self.data, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class FeaturePyramid:
    """Ordered feature maps, coarsest first, each finer level doubling the last."""

    levels: Tuple[FeatureMap, ...]

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels:
            raise DimensionError("pyramid needs at least one level")
        for coarse, fine in zip(levels, levels[1:]):
            if fine.height != 2 * coarse.height or fine.width != 2 * coarse.width:
                raise DimensionError(
                    f"broken dyadic chain: {coarse.width}x{coarse.height} -> {fine.width}x{fine.height}"
                )
            if fine.channels != coarse.channels:
                raise DimensionError("pyramid levels disagree on channel count")
        object.__setattr__(self, 'levels', levels)

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def base_width(self) -> int:
        return self.levels[-1].width

    @property
    def base_height(self) -> int:
        return self.levels[-1].height


def _blur(data: np.ndarray) -> np.ndarray:
    out = ndimage.convolve1d(data, _KERNEL, axis=0, mode='mirror')
    return ndimage.convolve1d(out, _KERNEL, axis=1, mode='mirror')


def downsample(data: np.ndarray) -> np.ndarray:
    """Blur then keep every second row and column."""
    return _blur(data)[::2, ::2]


def upsample(data: np.ndarray) -> np.ndarray:
    """Zero-insert to twice the size then blur with gain 2 per axis."""
    height, width = data.shape[:2]
    up = np.zeros((2 * height, 2 * width) + data.shape[2:], dtype=np.float64)
    up[::2, ::2] = data
    return _blur(up) * 4.0


def analyze(image: FeatureMap, levels: int = 5) -> FeaturePyramid:
    """Decompose an image into a Laplacian pyramid.

    Args:
        image: Image (or any feature map) to decompose
        levels: Number of pyramid levels, at least 1

    Returns:
        Pyramid whose coarsest level is the Gaussian base

    Raises:
        DimensionError: if the image size is not divisible by 2**(levels - 1)
    """
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    divisor = 2 ** (levels - 1)
    if image.width % divisor or image.height % divisor:
        raise DimensionError(
            f"image {image.width}x{image.height} must be divisible by {divisor} for a {levels}-level pyramid"
        )

    gaussians = [np.asarray(image.data, dtype=np.float64)]
    for _ in range(levels - 1):
        gaussians.append(downsample(gaussians[-1]))

    bands = [gaussians[-1]]
    for k in range(levels - 2, -1, -1):
        bands.append(gaussians[k] - upsample(gaussians[k + 1]))

    logger.debug(f"Analyzed {image.width}x{image.height} image into {levels} levels")
    return FeaturePyramid(tuple(FeatureMap(b) for b in bands))


def reconstruct(pyramid: FeaturePyramid) -> np.ndarray:
    """Coarse-to-fine reconstruction without the final clamp."""
    acc = pyramid.levels[0].data
    for level in pyramid.levels[1:]:
        acc = upsample(acc) + level.data
    return acc


def synthesize(pyramid: FeaturePyramid) -> ImageRGB:
    """Rebuild an image from a pyramid, clamped to [0, 1]."""
    if pyramid.levels[0].channels != 3:
        raise DimensionError(f"synthesis needs 3 channels, got {pyramid.levels[0].channels}")
    return ImageRGB(np.clip(reconstruct(pyramid), 0.0, 1.0))
