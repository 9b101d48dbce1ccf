from .ablate import ARMS, AblationRow, ablate, format_stability, format_table, weight_stability
from .degrade import degrade_underwater
from .model import (
    ToyNetParams,
    anchor_centers,
    count_parameters,
    decode,
    decode_boxes,
    forward_detect,
    init_toynet,
)
from .postprocess import nms, to_detections
from .synth import CLASS_NAMES, IMAGE_SIZE, SynthSample, synth_dataset, synth_sample
from .train import EpochRecord, TrainResult, predict, prepare_images, train_toy

__all__ = [
    "ARMS",
    "CLASS_NAMES",
    "IMAGE_SIZE",
    "AblationRow",
    "EpochRecord",
    "SynthSample",
    "ToyNetParams",
    "TrainResult",
    "ablate",
    "anchor_centers",
    "count_parameters",
    "decode",
    "decode_boxes",
    "degrade_underwater",
    "format_stability",
    "format_table",
    "forward_detect",
    "init_toynet",
    "nms",
    "predict",
    "prepare_images",
    "synth_dataset",
    "synth_sample",
    "to_detections",
    "train_toy",
    "weight_stability",
]
