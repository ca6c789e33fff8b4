"""
Ablation harness.

Renders a job under the full pipeline and under variants with one
component removed, then scores every variant against the full render
and, when available, against analytic ground truth.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from .compose import CinemagraphJob, LoopRenderer
from .field import DisplacementField, sample_positions
from .logger import get_logger
from .metrics import ReportRow, loop_gap, ms_ssim, rmse, static_consistency
from .pyramid import FeatureMap, FeaturePyramid, ImageRGB
from .warp import rescale_displacement, warp_level

logger = get_logger('evaluation')

ARMS = ('full', 'no-forward-warp', 'no-dfw', 'no-msdfw', 'no-mask')


def gather_level(
    features: FeatureMap,
    f_fwd: DisplacementField,
    f_bwd: DisplacementField,
    alpha_t: float,
) -> FeatureMap:
    """Backward warp: each cell reads the source at x - F(x), borders clamped."""
    height, width = features.shape
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    gathered = []
    for f in (f_fwd, f_bwd):
        disp = rescale_displacement(f, width, height).data
        gathered.append(sample_positions(features.data, xs - disp[:, :, 0], ys - disp[:, :, 1]))
    return FeatureMap(alpha_t * gathered[0] + (1.0 - alpha_t) * gathered[1])


def backward_warp_pyramid(
    pyramid: FeaturePyramid,
    f_fwd: DisplacementField,
    f_bwd: DisplacementField,
    alpha_t: float,
) -> FeaturePyramid:
    return FeaturePyramid(tuple(gather_level(level, f_fwd, f_bwd, alpha_t) for level in pyramid.levels))


def finest_only_warper(job: CinemagraphJob):
    """Warp the finest level only and leave coarser levels as analysed."""

    def warp(pyramid, f_fwd, f_bwd, alpha_t):
        *coarse, finest = pyramid.levels
        warped = warp_level(
            finest, f_fwd, f_bwd, alpha_t, job.large_hole_ratio, job.median_kernel, job.hole_epsilon
        )
        return FeaturePyramid(tuple(coarse) + (warped,))

    return warp


def renderer_for(job: CinemagraphJob, arm: str) -> LoopRenderer:
    if arm == 'full':
        return LoopRenderer(job)
    if arm == 'no-forward-warp':
        return LoopRenderer(job, pyramid_warper=backward_warp_pyramid)
    if arm == 'no-dfw':
        return LoopRenderer(replace(job, levels=1))
    if arm == 'no-msdfw':
        return LoopRenderer(job, pyramid_warper=finest_only_warper(job))
    if arm == 'no-mask':
        return LoopRenderer(job, refine_motion=False)
    raise ValueError(f"unknown ablation arm {arm!r}, expected one of {', '.join(ARMS)}")


@dataclass
class AblationReport:
    """Rendered frames per arm and the metric rows comparing them."""

    frames: Dict[str, List[ImageRGB]] = field(default_factory=dict)
    rows: List[ReportRow] = field(default_factory=list)

    def value(self, method: str, metric: str) -> float:
        for row_method, row_metric, value in self.rows:
            if (row_method, row_metric) == (method, metric):
                return value
        raise KeyError((method, metric))


def _mean_scores(frames: Sequence[ImageRGB], references: Sequence[ImageRGB], region) -> Dict[str, float]:
    return {
        'rmse': float(np.mean([rmse(f, r, region) for f, r in zip(frames, references)])),
        'ms_ssim': float(np.mean([ms_ssim(f, r) for f, r in zip(frames, references)])),
    }


def run_ablation(
    job: CinemagraphJob,
    truth: Optional[Sequence[ImageRGB]] = None,
    arms: Sequence[str] = ARMS,
    threads: int = 1,
) -> AblationReport:
    """Render every arm and score it.

    RMSE is measured on the dynamic region; MS-SSIM on whole frames.
    """
    if truth is not None and len(truth) != job.loop.frames:
        raise ValueError(f"expected {job.loop.frames} truth frames, got {len(truth)}")

    report = AblationReport()
    renderers = {}
    for arm in dict.fromkeys(('full',) + tuple(arms)):
        renderers[arm] = renderer_for(job, arm)
        report.frames[arm] = renderers[arm].render(threads)
        logger.info(f"Rendered ablation arm {arm}")

    full = renderers['full']
    region = full.image_mask if full.image_mask.data.any() else None
    references = {'full': report.frames['full']}
    if truth is not None:
        references['truth'] = list(truth)

    for reference_name, reference in references.items():
        for arm in arms:
            scores = _mean_scores(report.frames[arm], reference, region)
            report.rows.append((arm, f'rmse_vs_{reference_name}', scores['rmse']))
            report.rows.append((arm, f'ms_ssim_vs_{reference_name}', scores['ms_ssim']))

    for arm in arms:
        renderer = renderers[arm]
        if not renderer.image_mask.data.all():
            report.rows.append((
                arm, 'static_rmse',
                static_consistency(report.frames[arm], renderer.image, renderer.image_mask, renderer.delta),
            ))
        report.rows.append((arm, 'loop_gap', loop_gap(report.frames[arm])))

    return report
