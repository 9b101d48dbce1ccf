"""On-disk formats: YOLO-text datasets and JSON-lines predictions.

Dataset layout::

    DIR/classes.txt          one class name per line
    DIR/images/<id>.png
    DIR/labels/<id>.txt      "class cx cy w h" per line, normalized to [0, 1]
"""

import json
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from natsort import natsorted

from ..common.exceptions import AnnotationFormatError, InvalidBoxError
from ..enhance import read_image, write_image
from ..evaluation import Detection, GroundTruth
from ..fgiou import Box
from ..toydet import CLASS_NAMES, SynthSample

IMAGES = "images"
LABELS = "labels"
CLASSES_FILE = "classes.txt"
# Slack for normalized coordinates that were rounded when written.
RANGE_SLACK = 1e-6


def image_files(directory: Path) -> List[Path]:
    images = Path(directory) / IMAGES
    if not images.is_dir():
        raise AnnotationFormatError(images, 0, "missing images directory")
    return natsorted(images.glob("*.png"), key=lambda p: p.name)


def read_class_names(directory: Path) -> Optional[List[str]]:
    path = Path(directory) / CLASSES_FILE
    if not path.exists():
        return None
    return [line.strip() for line in path.read_text().splitlines() if line.strip()]


def parse_label_line(
    line: str, path: Path, lineno: int, width: int, height: int
) -> Tuple[int, Box]:
    """One ``class cx cy w h`` line → ``(class_id, corner box in pixels)``."""
    fields = line.split()
    if len(fields) != 5:
        raise AnnotationFormatError(path, lineno, f"expected 5 fields, got {len(fields)}")
    try:
        class_id = int(fields[0])
        cx, cy, w, h = (float(v) for v in fields[1:])
    except ValueError as e:
        raise AnnotationFormatError(path, lineno, f"not a number ({e})") from e
    if class_id < 0:
        raise AnnotationFormatError(path, lineno, f"negative class id {class_id}")
    coords = (cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)
    if not all(math.isfinite(v) for v in (cx, cy, w, h)) or w < 0 or h < 0:
        raise AnnotationFormatError(path, lineno, "invalid box size")
    if min(coords) < -RANGE_SLACK or max(coords) > 1.0 + RANGE_SLACK:
        raise AnnotationFormatError(path, lineno, "coordinates outside [0, 1]")
    x1, y1, x2, y2 = (min(max(v, 0.0), 1.0) for v in coords)
    return class_id, Box(x1 * width, y1 * height, x2 * width, y2 * height)


def read_labels(path: Path, width: int, height: int) -> List[Tuple[int, Box]]:
    """Objects of one label file; a missing or empty file means no objects."""
    if not path.exists():
        return []
    objects = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if line.strip():
            objects.append(parse_label_line(line, path, lineno, width, height))
    return objects


def _check_classes(objects, path: Path, num_classes: Optional[int]) -> None:
    if num_classes is None:
        return
    for class_id, _ in objects:
        if class_id >= num_classes:
            raise AnnotationFormatError(
                path, 0, f"class id {class_id} but only {num_classes} classes are listed"
            )


def read_dataset(directory: Path) -> List[SynthSample]:
    directory = Path(directory)
    names = read_class_names(directory)
    samples = []
    for image_path in image_files(directory):
        image = read_image(image_path)
        label_path = directory / LABELS / f"{image_path.stem}.txt"
        objects = read_labels(label_path, image.shape[1], image.shape[0])
        _check_classes(objects, label_path, None if names is None else len(names))
        samples.append(SynthSample(image, objects, image_id=image_path.stem))
    return samples


def read_annotations(directory: Path) -> List[GroundTruth]:
    """Ground truths of every image in a dataset directory, in image order."""
    return [
        GroundTruth(s.image_id, class_id, box)
        for s in read_dataset(directory)
        for class_id, box in s.objects
    ]


def format_label_line(class_id: int, box: Box, width: int, height: int) -> str:
    x1, y1, x2, y2 = box
    cx, cy = (x1 + x2) / 2 / width, (y1 + y2) / 2 / height
    w, h = (x2 - x1) / width, (y2 - y1) / height
    return f"{class_id} {cx:.8f} {cy:.8f} {w:.8f} {h:.8f}"


def write_dataset(
    directory: Path, samples: Sequence[SynthSample], class_names: Sequence[str] = CLASS_NAMES
) -> None:
    directory = Path(directory)
    (directory / LABELS).mkdir(parents=True, exist_ok=True)
    (directory / CLASSES_FILE).write_text("".join(f"{name}\n" for name in class_names))
    for s in samples:
        height, width = s.image.shape[:2]
        write_image(directory / IMAGES / f"{s.image_id}.png", s.image)
        lines = "".join(
            f"{format_label_line(c, box, width, height)}\n" for c, box in s.objects
        )
        (directory / LABELS / f"{s.image_id}.txt").write_text(lines)


def _prediction_record(d: Detection) -> Dict:
    return {
        "image_id": str(d.image_id),
        "class_id": d.class_id,
        "score": d.score,
        "box": list(d.box),
    }


def write_predictions(path: Path, detections: Iterable[Detection]) -> None:
    """JSON-lines sorted by image id, then descending score."""
    records = sorted(
        (_prediction_record(d) for d in detections),
        key=lambda r: (r["image_id"], -r["score"]),
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for record in records:
            f.write(json.dumps(record) + "\n")


def read_predictions(path: Path) -> List[Detection]:
    path = Path(path)
    detections = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                det = Detection(
                    str(record["image_id"]),
                    int(record["class_id"]),
                    float(record["score"]),
                    tuple(record["box"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise AnnotationFormatError(path, lineno, f"malformed record ({e})") from e
            except InvalidBoxError as e:
                raise AnnotationFormatError(path, lineno, str(e)) from e
            if not 0.0 <= det.score <= 1.0:
                raise AnnotationFormatError(path, lineno, f"score {det.score} outside [0, 1]")
            detections.append(det)
    return detections
