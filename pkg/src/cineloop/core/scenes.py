"""
Seeded synthetic scenes for demos, tests and the ablation harness.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .maskproc import Mask
from .pyramid import ImageRGB


def _background(width: int, height: int, seed: int) -> np.ndarray:
    """Smooth colour ramps with mild noise, not periodic in x."""
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    xr = xs / max(width - 1, 1)
    yr = ys / max(height - 1, 1)
    base = np.stack([0.25 + 0.5 * xr, 0.35 + 0.3 * yr * xr, 0.6 - 0.4 * yr], axis=-1)
    return np.clip(base + rng.normal(0.0, 0.03, base.shape), 0.0, 1.0)


def _stripes(xs: np.ndarray, ys: np.ndarray, period: float) -> np.ndarray:
    """Colour texture with the given period in x."""
    phase = 2.0 * np.pi * xs / period
    wave = 0.6 * np.sin(phase) + 0.4 * np.sin(2.0 * phase + 0.5)
    shade = 0.1 * np.cos(2.0 * np.pi * ys / 16.0)
    return np.clip(np.stack([
        0.45 + 0.25 * wave + shade,
        0.55 + 0.2 * wave,
        0.5 - 0.3 * wave + shade,
    ], axis=-1), 0.0, 1.0)


def synthetic_scene(width: int = 64, height: int = 64, seed: int = 0) -> Tuple[ImageRGB, Mask]:
    """A static background crossed by a horizontal band of moving stripes."""
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    band = (ys >= height * 3 // 8) & (ys < height * 5 // 8)
    data = np.where(band[:, :, None], _stripes(xs, ys, 8.0), _background(width, height, seed))
    return ImageRGB(data), Mask(band.astype(np.uint8))


@dataclass(frozen=True)
class TranslationScene:
    """A rectangle of x-periodic texture on a non-periodic background.

    Under a pure horizontal translation the rectangle's content at time t
    is known exactly, which gives ground truth for evaluating warps. The
    truth matches a looping render when N * u is a multiple of period.
    """

    width: int = 64
    height: int = 64
    period: int = 8
    seed: int = 0

    def _grids(self):
        return np.mgrid[0:self.height, 0:self.width].astype(np.float64)

    def mask(self) -> Mask:
        ys, xs = self._grids()
        inside = (
            (xs >= self.width // 4) & (xs < 3 * self.width // 4)
            & (ys >= self.height // 4) & (ys < 3 * self.height // 4)
        )
        return Mask(inside.astype(np.uint8))

    def _render(self, shift_x: float) -> ImageRGB:
        ys, xs = self._grids()
        texture = _stripes(xs - shift_x, ys, float(self.period))
        background = _background(self.width, self.height, self.seed)
        inside = self.mask().data.astype(bool)[:, :, None]
        return ImageRGB(np.where(inside, texture, background))

    def image(self) -> ImageRGB:
        return self._render(0.0)

    def truth(self, u: float, t: int) -> ImageRGB:
        """Exact frame t when the texture moves u pixels per frame."""
        return self._render(u * t)


def translation_scene(width: int = 64, height: int = 64, period: int = 8, seed: int = 0) -> Tuple[ImageRGB, Mask]:
    scene = TranslationScene(width, height, period, seed)
    return scene.image(), scene.mask()
