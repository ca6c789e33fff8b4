"""
Procedural motion fields and Middlebury .flo file I/O.
"""

from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .errors import FloFormatError
from .field import FlowField
from .logger import get_logger

logger = get_logger('flowsynth')

FLO_MAGIC = 202021.25
UNKNOWN_FLOW_THRESHOLD = 1e9

PathLike = Union[str, Path]


def _pixel_grid(width: int, height: int) -> Tuple[np.ndarray, np.ndarray]:
    if width < 1 or height < 1:
        raise ValueError(f"flow size must be positive, got {width}x{height}")
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    return xs, ys


def constant_flow(width: int, height: int, u: float, v: float) -> FlowField:
    """Every pixel moves by (u, v) per frame."""
    _pixel_grid(width, height)
    data = np.empty((height, width, 2), dtype=np.float64)
    data[:, :, 0] = u
    data[:, :, 1] = v
    return FlowField(data)


def rotation_flow(width: int, height: int, cx: float, cy: float, omega: float) -> FlowField:
    """Rigid rotation about (cx, cy) at omega radians per frame."""
    xs, ys = _pixel_grid(width, height)
    return FlowField(np.stack([-omega * (ys - cy), omega * (xs - cx)], axis=-1))


def radial_flow(width: int, height: int, cx: float, cy: float, k: float) -> FlowField:
    """Expansion (k > 0) or contraction (k < 0) about (cx, cy)."""
    xs, ys = _pixel_grid(width, height)
    return FlowField(np.stack([k * (xs - cx), k * (ys - cy)], axis=-1))


def read_flo(path: PathLike) -> FlowField:
    """Read a Middlebury .flo file.

    Layout (little-endian): float32 magic 202021.25, int32 width,
    int32 height, then height x width interleaved (u, v) float32.
    Values beyond 1e9 mark unknown flow and are read as 0.
    """
    with open(path, 'rb') as f:
        magic = np.fromfile(f, '<f4', count=1)
        if magic.size < 1:
            raise FloFormatError(f"truncated .flo file: {path}")
        if magic[0] != np.float32(FLO_MAGIC):
            raise FloFormatError(f"invalid .flo magic in {path}: {magic[0]}")
        dims = np.fromfile(f, '<i4', count=2)
        if dims.size < 2:
            raise FloFormatError(f"truncated .flo header: {path}")
        width, height = int(dims[0]), int(dims[1])
        if width <= 0 or height <= 0:
            raise FloFormatError(f"invalid .flo dimensions {width}x{height} in {path}")
        data = np.fromfile(f, '<f4', count=2 * width * height)
    if data.size < 2 * width * height:
        raise FloFormatError(f"truncated .flo data in {path}: {data.size} of {2 * width * height} values")

    data = data.reshape(height, width, 2).astype(np.float32)
    unknown = ~np.isfinite(data) | (np.abs(data) > UNKNOWN_FLOW_THRESHOLD)
    if unknown.any():
        logger.warning(f"{path}: {int(unknown.sum())} unknown flow values set to 0")
        data[unknown] = 0.0

    logger.debug(f"Read {width}x{height} flow from {path}")
    return FlowField(data)


def write_flo(path: PathLike, flow: FlowField) -> None:
    """Write a flow as a Middlebury .flo file."""
    with open(path, 'wb') as f:
        np.array([FLO_MAGIC], dtype='<f4').tofile(f)
        np.array([flow.width, flow.height], dtype='<i4').tofile(f)
        np.ascontiguousarray(flow.data, dtype='<f4').tofile(f)
    logger.debug(f"Wrote {flow.width}x{flow.height} flow to {path}")


def _make_colorwheel() -> np.ndarray:
    """Middlebury colour wheel: red, yellow, green, cyan, blue, magenta."""
    # (length, saturated channel, ramping channel, ramp rises)
    segments = (
        (15, 0, 1, True), (6, 1, 0, False), (4, 1, 2, True),
        (11, 2, 1, False), (13, 2, 0, True), (6, 0, 2, False),
    )
    wheel = []
    for length, full, ramp, rising in segments:
        part = np.zeros((length, 3))
        steps = np.floor(255.0 * np.arange(length) / length)
        part[:, full] = 255.0
        part[:, ramp] = steps if rising else 255.0 - steps
        wheel.append(part)
    return np.concatenate(wheel)


COLORWHEEL = _make_colorwheel()


def flow_to_color(flow: FlowField) -> np.ndarray:
    """Visualise a flow on the Middlebury colour wheel as uint8 RGB.

    Hue encodes direction and saturation the magnitude relative to the
    largest one; zero flow is white.
    """
    u = flow.data[:, :, 0].astype(np.float64)
    v = flow.data[:, :, 1].astype(np.float64)
    rad_max = np.hypot(u, v).max()
    if rad_max > 0:
        u = u / rad_max
        v = v / rad_max

    ncols = COLORWHEEL.shape[0]
    rad = np.hypot(u, v)
    angle = np.arctan2(-v, -u) / np.pi
    fk = (angle + 1.0) / 2.0 * (ncols - 1)
    k0 = np.floor(fk).astype(np.intp)
    k1 = (k0 + 1) % ncols
    f = fk - k0

    image = np.empty(u.shape + (3,), dtype=np.uint8)
    for i in range(3):
        col = (1.0 - f) * COLORWHEEL[k0, i] / 255.0 + f * COLORWHEEL[k1, i] / 255.0
        inside = rad <= 1.0
        col[inside] = 1.0 - rad[inside] * (1.0 - col[inside])
        col[~inside] *= 0.75
        image[:, :, i] = np.floor(255.0 * col)
    return image


PRESETS = {
    'constant': (constant_flow, 2),
    'rotation': (rotation_flow, 3),
    'radial': (radial_flow, 3),
}


def flow_from_preset(preset: str, width: int, height: int) -> FlowField:
    """Build a flow from text such as 'constant:1,0' or 'rotation:32,32,0.01'.

    Parameters are in pixels of the generated width x height field.
    """
    name, _, args = preset.partition(':')
    if name not in PRESETS:
        raise ValueError(f"unknown flow preset {name!r}, expected one of {', '.join(PRESETS)}")
    factory, arity = PRESETS[name]
    try:
        values = [float(part) for part in args.split(',')] if args else []
    except ValueError:
        raise ValueError(f"flow preset parameters must be numbers, got {args!r}")
    if len(values) != arity:
        raise ValueError(f"flow preset {name} takes {arity} parameters, got {len(values)}")
    return factory(width, height, *values)
