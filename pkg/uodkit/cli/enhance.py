from pathlib import Path
from typing import Optional

import click
from loguru import logger

from ..enhance import enhance_stages, read_image, write_image
from .utils import global_options, run_manifest, settings_from


@click.command()
@global_options
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("output_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--dump-stages",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Directory to write the four intermediate stage images into.",
)
@click.pass_context
def enhance(ctx, input_path: Path, output_path: Path, dump_stages: Optional[Path]):
    """Enhance one underwater image (color, CLAHE, dehaze, edge refine)."""
    cfg = settings_from(ctx).enhance
    with run_manifest(ctx, output_path.with_suffix(".manifest.json")) as manifest:
        stages = enhance_stages(read_image(input_path), cfg)
        write_image(output_path, stages["edge_refine"])
        manifest.outputs.append(str(output_path))
        if dump_stages is not None:
            for i, (name, img) in enumerate(stages.items(), start=1):
                path = dump_stages / f"{i}_{name}.png"
                write_image(path, img)
                manifest.outputs.append(str(path))
            logger.info(f"Wrote {len(stages)} stage images to {dump_stages}")
    click.echo(f"Enhanced image written to {output_path}")
