"""
Frame composition and looping-video rendering.

Every frame warps the analysed pyramid of the input image along the
future and past displacements, synthesizes the dynamic image and pastes
it over the (optionally restyled) static image through the mask.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from .errors import FrameRenderError, ShapeMismatchError
from .field import (
    DisplacementField, FlowField, LoopSpec, apply_mask, iter_displacements,
    loop_displacements, negate, normalize_speed,
)
from .logger import get_logger
from .maskproc import Mask, resize_mask
from .pyramid import FeaturePyramid, ImageRGB, analyze, synthesize
from .style import StyleParams, apply_style, style_delta
from .warp import HOLE_EPSILON, MEDIAN_KERNEL, warp_pyramid

logger = get_logger('compose')

PyramidWarper = Callable[[FeaturePyramid, DisplacementField, DisplacementField, float], FeaturePyramid]


@dataclass(frozen=True, eq=False)
class CinemagraphJob:
    """Inputs of one cinemagraph render.

    The mask may be at any resolution; it is resampled (nearest) to the
    image for compositing and to the flow for motion refinement.
    """

    image: ImageRGB
    mask: Mask
    flow: FlowField
    loop: LoopSpec
    levels: int = 5
    style: Optional[StyleParams] = None
    target_speed: Optional[float] = None
    large_hole_ratio: float = 0.03
    median_kernel: int = MEDIAN_KERNEL
    hole_epsilon: float = HOLE_EPSILON

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise ValueError(f"median kernel must be a positive odd size, got {self.median_kernel}")
        if self.hole_epsilon <= 0:
            raise ValueError(f"hole epsilon must be > 0, got {self.hole_epsilon}")
        if self.style is not None and self.style.beta is None:
            raise ValueError("style parameters need a beta")


def composite_frame(
    dynamic: ImageRGB,
    image: ImageRGB,
    mask: Mask,
    delta: Optional[ImageRGB] = None,
) -> ImageRGB:
    """S * dynamic + (1 - S) * (I + delta), clamped to [0, 1]."""
    shapes = {dynamic.shape, image.shape, mask.shape}
    if delta is not None:
        shapes.add(delta.shape)
    if len(shapes) != 1:
        raise ShapeMismatchError(f"composite inputs disagree on size: {sorted(shapes)}")

    static = image.data if delta is None else image.data + delta.data
    dynamic_pixels = mask.data.astype(bool)[:, :, None]
    return ImageRGB(np.clip(np.where(dynamic_pixels, dynamic.data, static), 0.0, 1.0))


class LoopRenderer:
    """Renders the frames of one job, sharing the expensive setup.

    The image pyramid, refined flow and style delta are computed once.
    Frames are independent given those, so they may render in parallel;
    output is identical to sequential rendering.
    """

    def __init__(
        self,
        job: CinemagraphJob,
        pyramid_warper: Optional[PyramidWarper] = None,
        refine_motion: bool = True,
    ):
        self.job = job
        self.loop = job.loop
        self.image = job.image
        self.image_mask = resize_mask(job.mask, job.image.width, job.image.height)
        self._warp = pyramid_warper or self._default_warper

        flow_mask = resize_mask(job.mask, job.flow.width, job.flow.height)
        flow = apply_mask(job.flow, flow_mask) if refine_motion else job.flow
        if job.target_speed is not None:
            flow = normalize_speed(flow, flow_mask, job.target_speed)
        self.flow = flow

        self.pyramid = analyze(job.image, job.levels)
        self.delta = style_delta(job.image, job.style) if job.style is not None else None

    def _default_warper(self, pyramid, f_fwd, f_bwd, alpha_t):
        job = self.job
        return warp_pyramid(
            pyramid, f_fwd, f_bwd, alpha_t, job.large_hole_ratio, job.median_kernel, job.hole_epsilon
        )

    def _compose(self, t: int, f_fwd: DisplacementField, f_bwd: DisplacementField) -> ImageRGB:
        alpha_t = self.loop.alpha(t)
        dynamic = synthesize(self._warp(self.pyramid, f_fwd, f_bwd, alpha_t))
        if self.job.style is not None:
            dynamic = apply_style(dynamic, self.job.style)
        return composite_frame(dynamic, self.image, self.image_mask, self.delta)

    def render_frame(self, t: int) -> ImageRGB:
        """Render a single frame, integrating its displacements from scratch."""
        f_fwd, f_bwd = loop_displacements(self.flow, self.loop, t)
        return self._compose(t, f_fwd, f_bwd)

    def _forward_chunks(self, size: int) -> Iterator[List[Tuple[int, DisplacementField]]]:
        chunk = []
        for t, field in enumerate(iter_displacements(self.flow, self.loop.frame_count)):
            chunk.append((t, field))
            if len(chunk) == size:
                yield chunk
                chunk = []
        if chunk:
            yield chunk

    def render(self, threads: int = 1, on_frame: Optional[Callable[[int], None]] = None) -> List[ImageRGB]:
        """Render all N + 1 frames in order.

        Past displacements are kept for the whole loop; future ones are
        integrated in step with rendering, `threads` frames at a time.
        """
        threads = max(1, int(threads))
        n = self.loop.frame_count
        backward = list(iter_displacements(negate(self.flow), n))
        frames: List[Optional[ImageRGB]] = [None] * (n + 1)

        logger.info(
            f"Rendering {n + 1} frames at {self.image.width}x{self.image.height}, "
            f"{self.job.levels} levels, {threads} threads"
        )
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for chunk in self._forward_chunks(threads):
                futures = [
                    (t, pool.submit(self._compose, t, f_fwd, backward[n - t])) for t, f_fwd in chunk
                ]
                for t, future in futures:
                    try:
                        frames[t] = future.result()
                    except Exception as e:
                        logger.error(f"Frame {t} failed: {e}")
                        raise FrameRenderError(t, e) from e
                    logger.debug(f"Rendered frame {t}")
                    if on_frame is not None:
                        on_frame(t)
        return frames


def render_loop(job: CinemagraphJob, threads: int = 1) -> List[ImageRGB]:
    """Render the N + 1 frames of a seamless loop."""
    return LoopRenderer(job).render(threads)
