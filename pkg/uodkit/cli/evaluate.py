import json
from pathlib import Path

import click

from ..evaluation import detection_summary
from .formats import read_annotations, read_class_names, read_predictions
from .utils import global_options, settings_from


@click.command(name="eval")
@global_options
@click.option(
    "--pred",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="JSON-lines predictions.",
)
@click.option(
    "--gt",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    required=True,
    help="Dataset directory holding the annotations.",
)
@click.option(
    "--iou",
    type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True),
    default=0.5,
    show_default=True,
    help="IoU threshold for precision, recall and F1.",
)
@click.option(
    "--conf",
    type=click.FloatRange(0.0, 1.0),
    default=0.25,
    show_default=True,
    help="Score threshold for precision, recall and F1.",
)
@click.pass_context
def evaluate(ctx, pred: Path, gt: Path, iou: float, conf: float):
    """Score predictions against annotations; prints JSON to stdout."""
    detections = read_predictions(pred)
    gts = read_annotations(gt)
    names = read_class_names(gt)
    if names is not None:
        num_classes = len(names)
    else:
        seen = [d.class_id for d in detections] + [g.class_id for g in gts]
        num_classes = max(seen, default=-1) + 1 or settings_from(ctx).train.num_classes
    summary = detection_summary(detections, gts, num_classes, conf_threshold=conf, iou_thresh=iou)
    click.echo(json.dumps(summary.as_dict(), indent=2))
