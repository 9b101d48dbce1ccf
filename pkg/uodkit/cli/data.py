from pathlib import Path

import click
from loguru import logger

from ..toydet import degrade_underwater, synth_dataset
from .formats import write_dataset
from .utils import global_options, run_manifest, settings_from


@click.command()
@global_options
@click.option("--n", "count", type=click.IntRange(min=1), required=True, help="Number of images.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
    help="Dataset directory (images/, labels/, classes.txt).",
)
@click.option("--degrade", is_flag=True, help="Apply the underwater degradation to every image.")
@click.pass_context
def synth(ctx, count: int, seed: int, out: Path, degrade: bool):
    """Generate a seeded synthetic detection dataset."""
    workers = settings_from(ctx).train.workers
    with run_manifest(ctx, out / "manifest.json", seeds={"dataset": seed}) as manifest:
        samples = synth_dataset(count, seed, workers=workers)
        if degrade:
            for s in samples:
                s.image = degrade_underwater(s.image, s.seed)
            logger.info(f"Degraded {len(samples)} images")
        write_dataset(out, samples)
        manifest.outputs.append(str(out))
    click.echo(f"Wrote {len(samples)} images to {out}")
