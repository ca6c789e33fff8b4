#!/usr/bin/env python3
import os
from importlib.metadata import PackageNotFoundError, version

import click
import numpy as np
from rich.console import Console
from rich.progress import BarColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from cineloop import __version__ as _source_version
from cineloop.core.compose import CinemagraphJob, LoopRenderer
from cineloop.core.config import Config
from cineloop.core.errors import CineloopError
from cineloop.core.evaluation import ARMS, run_ablation
from cineloop.core.field import FlowField, LoopSpec, integrate
from cineloop.core.flowsynth import flow_from_preset, flow_to_color, read_flo, write_flo
from cineloop.core.logger import configure_logging, get_logger, install_excepthook
from cineloop.core.maskproc import mask_area_ratio, refine_mask, threshold_mask
from cineloop.core.metrics import loop_gap, write_report
from cineloop.core.scenes import TranslationScene, synthetic_scene
from cineloop.core.settings import Settings
from cineloop.core.style import StyleParams, fit_style
from cineloop.utils.images import (
    load_image, load_mask, save_frames, save_gif, save_image, save_mask, save_rgb_array,
)

console = Console()
logger = get_logger('cli')

# Get package version
try:
    __version__ = version("cineloop")
except PackageNotFoundError:
    __version__ = _source_version

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']


def load_config() -> Config:
    return Config(Settings().get_settings())


def fail(message: str):
    """Print an error in red and exit with status 1."""
    console.print(f"[red]Error: {message}[/red]")
    raise click.exceptions.Exit(1)


def print_version(ctx, param, value):
    if not value or ctx.resilient_parsing:
        return
    console.print(f"[blue]Cineloop v{__version__}[/blue]")
    console.print(f"Config: {load_config().data_dir}")
    ctx.exit()


class CustomGroup(click.Group):
    def get_help(self, ctx):
        console.print(f"[blue]Cineloop v{__version__}[/blue]")
        console.print(f"Config: {load_config().data_dir}\n")
        console.print("Turn a still image, a motion field and a mask into a seamlessly looping cinemagraph.\n")
        console.print("Usage: cineloop [OPTIONS] COMMAND [ARGS]...\n")
        console.print("Run ", end="")
        console.print("'cineloop scene --out demo'", style="yellow", end="")
        console.print(" to write a synthetic scene to try the other commands on.\n")

        help_text = super().get_help(ctx)
        lines = help_text.split('\n')
        options_start = next(i for i, line in enumerate(lines) if line.startswith('Options:'))
        return '\n'.join(lines[options_start:])


@click.group(cls=CustomGroup)
@click.option('--version', is_flag=True, callback=print_version, expose_value=False, is_eager=True,
              help='Show version and exit')
@click.option('--log-level', type=click.Choice(LOG_LEVELS, case_sensitive=False),
              help='Console logging level (default: WARNING)')
@click.pass_context
def cli(ctx, log_level):
    """Turn a still image, a motion field and a mask into a seamlessly looping cinemagraph."""
    config = load_config()
    root_logger = configure_logging(log_level or config.get('LOG_LEVEL'))
    install_excepthook(root_logger)
    ctx.obj = config
    console.print(f"[blue]Cineloop v{__version__}[/blue]")


def _load_flow(flow_path, flow_preset, width, height):
    if (flow_path is None) == (flow_preset is None):
        fail("give exactly one of --flow or --flow-preset")
    if flow_path is not None:
        return read_flo(flow_path)
    return flow_from_preset(flow_preset, width, height)


def _load_inputs(image_path, mask_path, scene):
    if image_path is None and mask_path is None:
        if scene == 'translation':
            return TranslationScene().image(), TranslationScene().mask()
        return synthetic_scene()
    if image_path is None or mask_path is None:
        fail("--image and --mask must be given together")
    return load_image(image_path), load_mask(mask_path)


def _load_style(style_image, style_stats, beta):
    if style_image is None and not style_stats:
        if beta is not None:
            fail("--beta needs --style-image or --style-stats")
        return None
    if style_image is not None and style_stats:
        fail("give only one of --style-image and --style-stats")
    if beta is None:
        fail("--beta is required with a style")
    if style_image is not None:
        return fit_style(load_image(style_image)).with_beta(beta)
    return StyleParams.from_values(list(style_stats), beta)


def _render_with_progress(renderer: LoopRenderer, threads: int):
    with Progress(
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task("Rendering", total=renderer.loop.frames)
        return renderer.render(threads, on_frame=lambda t: progress.advance(task))


@cli.command()
@click.option('--image', 'image_path', type=click.Path(exists=True, dir_okay=False), help='Input image (PNG)')
@click.option('--mask', 'mask_path', type=click.Path(exists=True, dir_okay=False),
              help='Binary mask PNG, white = animated')
@click.option('--scene', type=click.Choice(['synthetic', 'translation']), default='synthetic',
              help='Built-in scene used when --image and --mask are omitted')
@click.option('--flow', 'flow_path', type=click.Path(exists=True, dir_okay=False), help='Motion field (.flo)')
@click.option('--flow-preset', help='constant:u,v | rotation:cx,cy,omega | radial:cx,cy,k')
@click.option('--flow-size', type=int, help='Preset flows are generated at SIZE x SIZE (default: 512)')
@click.option('--frames', type=int, help='Loop length N; N + 1 frames are written (default: 48)')
@click.option('--levels', type=int, help='Feature pyramid levels (default: 5)')
@click.option('--speed', type=float, help='Rescale the flow to this mean speed in px/frame')
@click.option('--style-image', type=click.Path(exists=True, dir_okay=False),
              help='Image whose colour statistics the frames are blended toward')
@click.option('--style-stats', type=float, nargs=6, default=None,
              help='Target means and standard deviations: m_r m_g m_b s_r s_g s_b')
@click.option('--beta', type=float, help='Style blend weight in [0, 1]')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Directory for frame_000.png ...')
@click.option('--gif', 'gif_path', type=click.Path(dir_okay=False), help='Animated GIF output')
@click.option('--threads', type=int, help='Worker threads (default: CINELOOP_THREADS or one per core)')
@click.pass_obj
def generate(config, image_path, mask_path, scene, flow_path, flow_preset, flow_size, frames, levels, speed,
             style_image, style_stats, beta, out_dir, gif_path, threads):
    """Render a seamlessly looping cinemagraph.

    Example:
      cineloop generate --image sky.png --mask sky_mask.png --flow-preset constant:2,0 --out frames
    """
    if out_dir is None and gif_path is None:
        fail("give --out and/or --gif")
    frames = frames if frames is not None else config.get('FRAMES')
    levels = levels if levels is not None else config.get('LEVELS')
    flow_size = flow_size if flow_size is not None else config.get('FLOW_SIZE')

    try:
        threads = threads if threads is not None else config.threads()
        image, mask = _load_inputs(image_path, mask_path, scene)
        flow = _load_flow(flow_path, flow_preset, flow_size, flow_size)
        job = CinemagraphJob(
            image=image,
            mask=mask,
            flow=flow,
            loop=LoopSpec(frames),
            levels=levels,
            style=_load_style(style_image, style_stats, beta),
            target_speed=speed,
            large_hole_ratio=config.get('LARGE_HOLE_RATIO'),
            median_kernel=config.get('MEDIAN_KERNEL'),
            hole_epsilon=config.get('HOLE_EPSILON'),
        )
        renderer = LoopRenderer(job)
        rendered = _render_with_progress(renderer, threads)

        if out_dir is not None:
            save_frames(rendered, out_dir)
            console.print(f"[green]Wrote {len(rendered)} frames to {out_dir}[/green]")
        if gif_path is not None:
            save_gif(rendered, gif_path, config.get('GIF_FRAME_MS'))
            console.print(f"[green]Wrote {gif_path}[/green]")
    except (CineloopError, ValueError, OSError) as e:
        logger.error(f"generate failed: {e}")
        fail(str(e))

    console.print(f"loop_gap: {loop_gap(rendered):.6g}")


@cli.group()
def flow():
    """Create, integrate and inspect motion fields (.flo)."""


@flow.command()
@click.option('--preset', required=True, help='constant:u,v | rotation:cx,cy,omega | radial:cx,cy,k')
@click.option('--size', type=int, nargs=2, metavar='W H', help='Field size (default: FLOW_SIZE square)')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='Output .flo')
@click.pass_obj
def synth(config, preset, size, out_path):
    """Write a procedural motion field."""
    width, height = size if size else (config.get('FLOW_SIZE'), config.get('FLOW_SIZE'))
    try:
        write_flo(out_path, flow_from_preset(preset, width, height))
    except (CineloopError, ValueError, OSError) as e:
        fail(str(e))
    console.print(f"[green]Wrote {width}x{height} {preset.partition(':')[0]} flow to {out_path}[/green]")


@flow.command(name='integrate')
@click.option('--flo', 'flo_path', required=True, type=click.Path(exists=True, dir_okay=False), help='Input .flo')
@click.option('--steps', required=True, type=int, help='Number of frames t to integrate')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='Output .flo')
def integrate_cmd(flo_path, steps, out_path):
    """Euler-integrate a motion field and write the displacement F_{0->t}."""
    try:
        displacement = integrate(read_flo(flo_path), steps)
        write_flo(out_path, FlowField(displacement.data))
    except (CineloopError, ValueError, OSError) as e:
        fail(str(e))
    console.print(f"[green]Wrote displacement after {steps} steps to {out_path}[/green]")


@flow.command()
@click.option('--flo', 'flo_path', required=True, type=click.Path(exists=True, dir_okay=False), help='Input .flo')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='Output PNG')
def viz(flo_path, out_path):
    """Render a motion field on the Middlebury colour wheel."""
    try:
        save_rgb_array(flow_to_color(read_flo(flo_path)), out_path)
    except (CineloopError, OSError) as e:
        fail(str(e))
    console.print(f"[green]Wrote {out_path}[/green]")


@flow.command()
@click.option('--flo', 'flo_path', required=True, type=click.Path(exists=True, dir_okay=False), help='Input .flo')
def inspect(flo_path):
    """Print the size and per-channel statistics of a .flo file."""
    try:
        field = read_flo(flo_path)
    except (CineloopError, OSError) as e:
        fail(str(e))

    console.print(f"\n[bold]{flo_path}[/bold]: {field.width}x{field.height}")
    table = Table()
    table.add_column("Channel")
    table.add_column("Mean", justify="right")
    table.add_column("Min", justify="right")
    table.add_column("Max", justify="right")
    for index, name in enumerate(('u', 'v')):
        channel = field.data[:, :, index].astype(np.float64)
        table.add_row(name, f"{channel.mean():.6g}", f"{channel.min():.6g}", f"{channel.max():.6g}")
    console.print(table)


@cli.command()
@click.option('--in', 'in_path', required=True, type=click.Path(exists=True, dir_okay=False), help='Input mask PNG')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='Refined mask PNG')
@click.option('--threshold', type=float, help='Minimum component area as a fraction of the image (default: 0.03)')
@click.option('--channel', type=int, help='Build the mask from this channel of an RGB overlay')
@click.option('--cutoff', type=float, default=0.5, show_default=True, help='Channel value above which a pixel is dynamic')
@click.pass_obj
def mask(config, in_path, out_path, threshold, channel, cutoff):
    """Remove small regions from a segmentation mask."""
    threshold = threshold if threshold is not None else config.get('MASK_AREA_THRESHOLD')
    try:
        if channel is not None:
            source = threshold_mask(load_image(in_path), channel, cutoff)
        else:
            source = load_mask(in_path)
        refined = refine_mask(source, threshold)
        save_mask(refined, out_path)
    except (CineloopError, ValueError, OSError) as e:
        fail(str(e))
    console.print(
        f"[green]Dynamic area {mask_area_ratio(source):.2%} -> {mask_area_ratio(refined):.2%}, "
        f"wrote {out_path}[/green]"
    )


@cli.command(name='eval')
@click.option('--image', 'image_path', type=click.Path(exists=True, dir_okay=False), help='Input image (PNG)')
@click.option('--mask', 'mask_path', type=click.Path(exists=True, dir_okay=False), help='Binary mask PNG')
@click.option('--flow', 'flow_path', type=click.Path(exists=True, dir_okay=False), help='Motion field (.flo)')
@click.option('--flow-preset', help='Preset generated at image resolution (default: constant:1,0)')
@click.option('--frames', type=int, default=8, show_default=True, help='Loop length N')
@click.option('--levels', type=int, help='Feature pyramid levels (default: 5)')
@click.option('--csv', 'csv_path', required=True, type=click.Path(dir_okay=False), help='Report output')
@click.option('--threads', type=int, help='Worker threads')
@click.pass_obj
def evaluate(config, image_path, mask_path, flow_path, flow_preset, frames, levels, csv_path, threads):
    """Compare the full pipeline against ablated variants.

    Without inputs, a translation scene with known ground truth is used.
    """
    levels = levels if levels is not None else config.get('LEVELS')
    try:
        threads = threads if threads is not None else config.threads()
        truth = None
        if image_path is None and mask_path is None and flow_path is None and flow_preset is None:
            scene = TranslationScene()
            image, mask_ = scene.image(), scene.mask()
            flow_preset = 'constant:1,0'
            truth = [scene.truth(1.0, t) for t in range(frames + 1)]
        else:
            image, mask_ = _load_inputs(image_path, mask_path, 'translation')
            if flow_path is None and flow_preset is None:
                flow_preset = 'constant:1,0'
        flow_field = _load_flow(flow_path, flow_preset, image.width, image.height)
        job = CinemagraphJob(
            image=image, mask=mask_, flow=flow_field, loop=LoopSpec(frames), levels=levels,
            large_hole_ratio=config.get('LARGE_HOLE_RATIO'),
            median_kernel=config.get('MEDIAN_KERNEL'), hole_epsilon=config.get('HOLE_EPSILON'),
        )
        with console.status("Rendering ablation arms..."):
            report = run_ablation(job, truth=truth, threads=threads)
        write_report(report.rows, csv_path)
    except (CineloopError, ValueError, OSError) as e:
        logger.error(f"eval failed: {e}")
        fail(str(e))

    table = Table(title="Ablation")
    table.add_column("Method")
    metrics = list(dict.fromkeys(metric for _, metric, _ in report.rows))
    for metric in metrics:
        table.add_column(metric, justify="right")
    for arm in ARMS:
        values = {metric: value for method, metric, value in report.rows if method == arm}
        table.add_row(arm, *(f"{values[m]:.4f}" if m in values else "-" for m in metrics))
    console.print(table)
    console.print("[yellow]LPIPS and FID need pretrained networks and are not computed.[/yellow]")
    console.print(f"[green]Wrote {len(report.rows)} rows to {csv_path}[/green]")


@cli.command()
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory')
@click.option('--kind', type=click.Choice(['synthetic', 'translation']), default='synthetic', show_default=True)
@click.option('--size', type=int, nargs=2, default=(64, 64), show_default=True, metavar='W H')
@click.option('--seed', type=int, default=0, show_default=True)
def scene(out_dir, kind, size, seed):
    """Write a synthetic scene as image.png and mask.png."""
    width, height = size
    try:
        if kind == 'translation':
            built = TranslationScene(width, height, seed=seed)
            image, mask_ = built.image(), built.mask()
        else:
            image, mask_ = synthetic_scene(width, height, seed)
        os.makedirs(out_dir, exist_ok=True)
        save_image(image, os.path.join(out_dir, 'image.png'))
        save_mask(mask_, os.path.join(out_dir, 'mask.png'))
    except (CineloopError, ValueError, OSError) as e:
        fail(str(e))
    console.print(f"[green]Wrote {kind} scene to {out_dir}[/green]")


@cli.command()
@click.option('--frames', type=int, help='Default loop length N (default: 48)')
@click.option('--levels', type=int, help='Default pyramid levels (default: 5)')
@click.option('--flow-size', type=int, help='Default preset flow size (default: 512)')
@click.option('--threads', type=int, help='Worker threads (default: one per core)')
@click.option('--log-level', type=click.Choice(LOG_LEVELS, case_sensitive=False),
              help='Logging level (default: WARNING)')
def settings(frames, levels, flow_size, threads, log_level):
    """View or update application settings.

    Example:
      cineloop settings --frames 24 --threads 4
    """
    settings = Settings()

    updates = {}
    if frames is not None:
        updates['frames'] = frames
    if levels is not None:
        updates['levels'] = levels
    if flow_size is not None:
        updates['flow_size'] = flow_size
    if threads is not None:
        if threads < 1:
            fail("--threads must be >= 1")
        updates['threads'] = threads
    if log_level is not None:
        updates['log_level'] = log_level.upper()

    if updates:
        if settings.update_settings(updates):
            console.print("[green]Settings updated successfully![/green]")
        else:
            fail("failed to update settings")

    current = settings.get_settings()
    console.print("\n[bold]Current Settings:[/bold]")
    for key in ('frames', 'levels', 'flow_size', 'threads', 'log_level'):
        value = current.get(key)
        console.print(f"{key}: {value if value is not None else 'auto'}")


def main():
    """Main entry point for the CLI."""
    cli()


if __name__ == '__main__':
    main()
