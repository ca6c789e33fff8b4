"""
Colour style interpolation.

Per-channel moment matching toward a target image's statistics, blended
with the source by beta. The static region receives the same change as a
signed colour delta.
"""

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .logger import get_logger
from .pyramid import ImageRGB

logger = get_logger('style')

STD_FLOOR = 1e-4


@dataclass(frozen=True, eq=False)
class StyleParams:
    """Target per-channel mean and standard deviation plus blend weight beta."""

    mean: np.ndarray
    std: np.ndarray
    beta: Optional[float] = None

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64).reshape(-1)
        std = np.array(self.std, dtype=np.float64).reshape(-1)
        if mean.shape != (3,) or std.shape != (3,):
            raise ValueError("style needs three means and three standard deviations")
        if not (np.isfinite(mean).all() and np.isfinite(std).all()):
            raise ValueError("style statistics must be finite")
        if (std <= 0).any():
            raise ValueError(f"target standard deviations must be > 0, got {std.tolist()}")
        if self.beta is not None and not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        mean.setflags(write=False)
        std.setflags(write=False)
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'std', std)

    @classmethod
    def from_values(cls, values: Sequence[float], beta: Optional[float] = None) -> 'StyleParams':
        """Build from six floats: three means then three standard deviations."""
        if len(values) != 6:
            raise ValueError(f"expected 6 style values, got {len(values)}")
        return cls(values[:3], values[3:], beta)

    def with_beta(self, beta: float) -> 'StyleParams':
        return replace(self, beta=beta)


def _channel_stats(image: ImageRGB):
    pixels = image.data.reshape(-1, 3)
    return pixels.mean(axis=0), np.maximum(pixels.std(axis=0), STD_FLOOR)


def fit_style(target: ImageRGB) -> StyleParams:
    """Per-channel mean and (floored) standard deviation of a target image."""
    mean, std = _channel_stats(target)
    return StyleParams(mean, std)


def style_delta(image: ImageRGB, params: StyleParams) -> ImageRGB:
    """Signed colour change beta * (T(I) - I), unclamped."""
    if params.beta is None:
        raise ValueError("style beta is not set")
    mean, std = _channel_stats(image)
    transferred = (image.data - mean) * (params.std / std) + params.mean
    return ImageRGB(params.beta * (transferred - image.data))


def apply_style(image: ImageRGB, params: StyleParams, clamp: bool = True) -> ImageRGB:
    """Blend an image toward the target statistics: I + beta * (T(I) - I)."""
    styled = image.data + style_delta(image, params).data
    if clamp:
        styled = np.clip(styled, 0.0, 1.0)
    return ImageRGB(styled)
