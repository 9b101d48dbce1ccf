from .clahe import clahe_luminance
from .color import color_correct, lab_to_srgb, srgb_to_lab
from .dehaze import soft_guided_dehaze
from .filters import gaussian_blur, guided_filter
from .image import read_image, write_image
from .pipeline import STAGES, enhance_many, enhance_pipeline, enhance_stages
from .refine import edge_refine

__all__ = [
    "STAGES",
    "clahe_luminance",
    "color_correct",
    "edge_refine",
    "enhance_many",
    "enhance_pipeline",
    "enhance_stages",
    "gaussian_blur",
    "guided_filter",
    "lab_to_srgb",
    "read_image",
    "soft_guided_dehaze",
    "srgb_to_lab",
    "write_image",
]
