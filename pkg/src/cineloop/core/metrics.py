"""
Image quality metrics for evaluating rendered loops.

RMSE on the 0-255 scale, multi-scale SSIM on luminance, and the
first/last frame gap that measures how seamlessly a loop closes.
LPIPS and FID need pretrained networks and are not provided.
"""

import csv
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal

from .errors import DimensionError, ShapeMismatchError
from .logger import get_logger
from .maskproc import Mask
from .pyramid import ImageRGB

logger = get_logger('metrics')

MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
K1 = 0.01
K2 = 0.03
DATA_RANGE = 1.0
LUMA = np.array([0.299, 0.587, 0.114])

ReportRow = Tuple[str, str, float]


def _same_shape(a: ImageRGB, b: ImageRGB) -> None:
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(f"images disagree on shape: {a.data.shape} vs {b.data.shape}")


def rmse(a: ImageRGB, b: ImageRGB, mask: Optional[Mask] = None) -> float:
    """Root mean squared difference on the 0-255 scale over (masked) pixels."""
    _same_shape(a, b)
    diff = (a.data * 255.0 - b.data * 255.0) ** 2
    if mask is not None:
        if mask.shape != a.shape:
            raise ShapeMismatchError("mask and images disagree on size")
        support = mask.data.astype(bool)
        if not support.any():
            raise ValueError("mask selects no pixels")
        diff = diff[support]
    return float(np.sqrt(diff.mean()))


def gaussian_window(size: int = WINDOW_SIZE, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    taps = signal.windows.gaussian(size, sigma)
    window = np.outer(taps, taps)
    return window / window.sum()


def luminance(image: ImageRGB) -> np.ndarray:
    return image.data @ LUMA


def ssim_components(x: np.ndarray, y: np.ndarray, window: np.ndarray) -> Tuple[float, float]:
    """Mean SSIM and mean contrast-structure term over valid windows."""
    c1 = (K1 * DATA_RANGE) ** 2
    c2 = (K2 * DATA_RANGE) ** 2

    def filt(z):
        return signal.convolve2d(z, window, mode='valid')

    mu_x = filt(x)
    mu_y = filt(y)
    mu_xx = mu_x * mu_x
    mu_yy = mu_y * mu_y
    mu_xy = mu_x * mu_y
    sigma_xx = filt(x * x) - mu_xx
    sigma_yy = filt(y * y) - mu_yy
    sigma_xy = filt(x * y) - mu_xy

    cs_map = (2.0 * sigma_xy + c2) / (sigma_xx + sigma_yy + c2)
    ssim_map = ((2.0 * mu_xy + c1) / (mu_xx + mu_yy + c1)) * cs_map
    return float(ssim_map.mean()), float(cs_map.mean())


def _halve(z: np.ndarray) -> np.ndarray:
    height, width = (z.shape[0] // 2) * 2, (z.shape[1] // 2) * 2
    z = z[:height, :width]
    return z.reshape(height // 2, 2, width // 2, 2).mean(axis=(1, 3))


def scale_count(width: int, height: int, max_scales: int = len(MS_SSIM_WEIGHTS)) -> int:
    """Scales for which the coarsest image still holds one full window."""
    count = 0
    size = min(width, height)
    while count < max_scales and size >= WINDOW_SIZE:
        count += 1
        size //= 2
    return count


def ms_ssim(a: ImageRGB, b: ImageRGB) -> float:
    """Multi-scale structural similarity of the luminance channels, in [0, 1].

    Scales are dropped (and the remaining weights renormalized) when the
    image is too small for five.
    """
    _same_shape(a, b)
    scales = scale_count(a.width, a.height)
    if scales == 0:
        raise DimensionError(f"image {a.width}x{a.height} is smaller than one {WINDOW_SIZE}x{WINDOW_SIZE} window")

    weights = np.array(MS_SSIM_WEIGHTS[:scales])
    weights = weights / weights.sum()
    window = gaussian_window()

    x, y = luminance(a), luminance(b)
    value = 1.0
    for s in range(scales):
        ssim_mean, cs_mean = ssim_components(x, y, window)
        term = ssim_mean if s == scales - 1 else cs_mean
        value *= max(term, 0.0) ** weights[s]
        x, y = _halve(x), _halve(y)
    return float(min(max(value, 0.0), 1.0))


def loop_gap(frames: Sequence[ImageRGB]) -> float:
    """Largest per-pixel difference between the first and last frame."""
    if len(frames) < 2:
        raise ValueError(f"loop gap needs at least 2 frames, got {len(frames)}")
    _same_shape(frames[0], frames[-1])
    return float(np.abs(frames[0].data - frames[-1].data).max())


def static_consistency(
    frames: Iterable[ImageRGB],
    image: ImageRGB,
    mask: Mask,
    delta: Optional[ImageRGB] = None,
) -> float:
    """Mean RMSE of the static region of each frame against the input."""
    reference = image.data if delta is None else image.data + delta.data
    reference = ImageRGB(np.clip(reference, 0.0, 1.0))
    static = Mask(1 - mask.data)
    values = [rmse(frame, reference, static) for frame in frames]
    if not values:
        raise ValueError("no frames given")
    return float(np.mean(values))


def write_report(rows: Iterable[ReportRow], path: Union[str, Path]) -> List[ReportRow]:
    """Write evaluation rows as CSV with columns method, metric, value."""
    rows = list(rows)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(['method', 'metric', 'value'])
        for method, metric, value in rows:
            writer.writerow([method, metric, f"{value:.6f}"])
    logger.info(f"Wrote {len(rows)} metric rows to {path}")
    return rows
