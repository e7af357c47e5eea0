"""Scribble-driven interactive segmentation for dual-modality 3-D volumes."""

from .geodesic import (
    DistanceMap,
    GeodesicConfig,
    determine_roi,
    gdt_exact,
    gdt_full,
    gdt_roi,
)
from .io import load_volume, save_volume
from .rle import mask_to_wire, rle_decode, rle_encode, wire_to_mask
from .simulate import (
    Ellipsoid,
    ScribbleSet,
    SimulationConfig,
    calc_ellipsoid,
    clip_margin,
    corrective_annotator_step,
    draw_annotation,
    make_rng,
    sample_user_input,
    simulate_training_annotations,
)
from .volume import (
    BoundingBox,
    ModalityPair,
    Volume,
    bbox_of_mask,
    dice,
    empty_mask,
    expand_bbox,
    resample_to_grid,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "DistanceMap",
    "Ellipsoid",
    "GeodesicConfig",
    "ModalityPair",
    "ScribbleSet",
    "SimulationConfig",
    "Volume",
    "bbox_of_mask",
    "calc_ellipsoid",
    "clip_margin",
    "corrective_annotator_step",
    "determine_roi",
    "dice",
    "draw_annotation",
    "empty_mask",
    "expand_bbox",
    "gdt_exact",
    "gdt_full",
    "gdt_roi",
    "load_volume",
    "make_rng",
    "mask_to_wire",
    "resample_to_grid",
    "rle_decode",
    "rle_encode",
    "sample_user_input",
    "save_volume",
    "simulate_training_annotations",
    "wire_to_mask",
    "__version__",
]
