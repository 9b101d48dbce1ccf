import json
from pathlib import Path
from typing import Optional

import click
from loguru import logger

from ..numcore.serialization import save_params
from ..toydet import train_toy
from .formats import read_dataset, write_dataset, write_predictions
from .utils import global_options, run_manifest, settings_from

PARAMS_FILE = "params.bin"
LOG_FILE = "train_log.jsonl"
PREDICTIONS_FILE = "predictions.jsonl"
VAL_DIR = "val"


@click.command()
@global_options
@click.option(
    "--data",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    required=True,
    help="Dataset directory written by 'uodkit synth'.",
)
@click.option("--dpsa/--no-dpsa", default=None, help="DPSA_SPPF neck instead of plain SPPF.")
@click.option("--fgiou/--no-fgiou", default=None, help="FGIoU loss instead of BCE + (1 - IoU).")
@click.option("--enhance/--no-enhance", default=None, help="Enhance images before training.")
@click.option("--epochs", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None)
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
    help="Run directory for params, logs and predictions.",
)
@click.pass_context
def train(
    ctx,
    data: Path,
    dpsa: Optional[bool],
    fgiou: Optional[bool],
    enhance: Optional[bool],
    epochs: Optional[int],
    seed: Optional[int],
    out: Path,
):
    """Train the toy detector. Unset flags fall back to the configured values."""
    settings = settings_from(ctx)
    overrides = {
        "use_dpsa": dpsa,
        "use_fgiou": fgiou,
        "use_enhance": enhance,
        "epochs": epochs,
        "seed": seed,
    }
    cfg = settings.train.model_copy(
        update={k: v for k, v in overrides.items() if v is not None}
    )
    samples = read_dataset(data)
    out.mkdir(parents=True, exist_ok=True)

    with run_manifest(ctx, out / "manifest.json", seeds={"train": cfg.seed}) as manifest:
        with open(out / LOG_FILE, "w") as log_file:

            def on_epoch(record):
                log_file.write(json.dumps(record.as_dict()) + "\n")
                log_file.flush()

            result = train_toy(cfg, samples, settings.enhance, on_epoch=on_epoch)

        save_params(
            out / PARAMS_FILE,
            result.params.named_parameters(),
            meta={"arm": cfg.arm_name(), "train": cfg.model_dump(mode="json")},
        )
        write_predictions(out / PREDICTIONS_FILE, result.val_predictions)
        write_dataset(out / VAL_DIR, result.val)
        manifest.outputs.extend(
            str(out / name) for name in (PARAMS_FILE, LOG_FILE, PREDICTIONS_FILE, VAL_DIR)
        )
        logger.info(f"Run written to {out}")

    final = result.final
    click.echo(
        f"{cfg.arm_name()}: epoch {final.epoch} loss={final.loss:.4f} "
        f"mAP50={final.val_map50:.4f} mAP50:95={final.val_map50_95:.4f}"
    )
