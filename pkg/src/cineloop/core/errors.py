"""Exception types raised by the cinemagraph engine."""


class CineloopError(ValueError):
    """Base class for invalid inputs and failed engine operations."""


class ShapeMismatchError(CineloopError):
    """Two grids that must share a resolution do not."""


class DimensionError(CineloopError):
    """A grid has dimensions the operation cannot accept."""


class DegenerateMotionError(CineloopError):
    """A motion field has no usable motion over its support."""


class HoleFillError(CineloopError):
    """Hole filling has no known values to fill from."""


class FloFormatError(CineloopError):
    """A .flo file is malformed."""


class MaskFormatError(CineloopError):
    """A mask image holds values other than 0 and 255."""


class FrameRenderError(CineloopError):
    """Rendering one frame of a loop failed."""

    def __init__(self, frame_index: int, cause: Exception):
        self.frame_index = frame_index
        self.cause = cause
        super().__init__(f"frame {frame_index} failed: {cause}")
