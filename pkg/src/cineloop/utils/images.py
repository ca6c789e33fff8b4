"""Image file input and output (PNG frames, masks, animated GIF)."""

import os
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
from PIL import Image

from cineloop.core.errors import MaskFormatError
from cineloop.core.logger import get_logger
from cineloop.core.maskproc import Mask
from cineloop.core.pyramid import ImageRGB

logger = get_logger('images')

PathLike = Union[str, Path]


def to_uint8(image: ImageRGB) -> np.ndarray:
    """Quantize [0, 1] floats to 8 bits by round(v * 255)."""
    return np.rint(np.clip(image.data, 0.0, 1.0) * 255.0).astype(np.uint8)


def load_image(path: PathLike) -> ImageRGB:
    """Load any Pillow-readable image as RGB in [0, 1]."""
    with Image.open(path) as img:
        data = np.asarray(img.convert('RGB'), dtype=np.float64) / 255.0
    logger.debug(f"Loaded {path} ({data.shape[1]}x{data.shape[0]})")
    return ImageRGB(data)


def save_image(image: ImageRGB, path: PathLike) -> None:
    Image.fromarray(to_uint8(image), mode='RGB').save(path, format='PNG')


def load_mask(path: PathLike) -> Mask:
    """Load a binary mask PNG: single channel, every value 0 or 255."""
    with Image.open(path) as img:
        if img.mode == '1':
            img = img.convert('L')
        if img.mode != 'L':
            raise MaskFormatError(f"mask {path} must be single-channel, got mode {img.mode}")
        data = np.asarray(img)
    if not np.isin(data, (0, 255)).all():
        raise MaskFormatError(f"mask {path} holds values other than 0 and 255")
    return Mask((data == 255).astype(np.uint8))


def save_mask(mask: Mask, path: PathLike) -> None:
    Image.fromarray((mask.data * 255).astype(np.uint8), mode='L').save(path, format='PNG')


def frame_name(index: int, count: int) -> str:
    """frame_000.png style names, widened when there are more than 1000 frames."""
    width = max(3, len(str(count - 1)))
    return f"frame_{index:0{width}d}.png"


def save_frames(frames: Sequence[ImageRGB], out_dir: PathLike) -> List[str]:
    """Write a PNG sequence and return the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for index, frame in enumerate(frames):
        path = os.path.join(out_dir, frame_name(index, len(frames)))
        save_image(frame, path)
        paths.append(path)
    logger.info(f"Wrote {len(paths)} frames to {out_dir}")
    return paths


def save_gif(frames: Sequence[ImageRGB], path: PathLike, frame_ms: int = 42) -> None:
    """Write an endlessly looping animated GIF.

    The last frame equals the first in a closed loop, so it is left out
    to avoid a stutter at the seam.
    """
    if not frames:
        raise ValueError("no frames to write")
    sequence = list(frames[:-1]) if len(frames) > 1 else list(frames)
    images = [Image.fromarray(to_uint8(frame), mode='RGB') for frame in sequence]
    images[0].save(
        path,
        format='GIF',
        save_all=True,
        append_images=images[1:],
        duration=frame_ms,
        loop=0,
        optimize=False,
        disposal=1,
    )
    logger.info(f"Wrote {len(images)}-frame GIF to {path}")


def save_rgb_array(data: np.ndarray, path: PathLike) -> None:
    """Write an (H, W, 3) uint8 array, e.g. a flow visualization."""
    Image.fromarray(np.asarray(data, dtype=np.uint8), mode='RGB').save(path, format='PNG')
