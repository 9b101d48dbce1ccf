from pathlib import Path
from typing import Optional

import click

from ..toydet import ablate as run_ablation
from ..toydet import format_stability, format_table, weight_stability
from .formats import read_dataset
from .utils import global_options, run_manifest, settings_from


@click.command()
@global_options
@click.option(
    "--data",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    required=True,
    help="Dataset directory written by 'uodkit synth'.",
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
    help="Markdown file for the results table.",
)
@click.option("--epochs", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None)
@click.option(
    "--stability",
    is_flag=True,
    help="Also retrain the full arm with each loss weight scaled by 0.8 and 1.2.",
)
@click.pass_context
def ablate(ctx, data: Path, out: Path, epochs: Optional[int], seed: Optional[int], stability):
    """Train the four arms (baseline, +DPSA, +FGIoU, both) and tabulate mAP."""
    settings = settings_from(ctx)
    overrides = {"epochs": epochs, "seed": seed}
    cfg = settings.train.model_copy(update={k: v for k, v in overrides.items() if v is not None})
    samples = read_dataset(data)

    with run_manifest(ctx, out.with_suffix(".manifest.json"), {"train": cfg.seed}) as manifest:
        text = format_table(run_ablation(cfg, samples, settings.enhance))
        if stability:
            text += "\n" + format_stability(weight_stability(cfg, samples, settings.enhance))
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        manifest.outputs.append(str(out))
    click.echo(text, nl=False)
