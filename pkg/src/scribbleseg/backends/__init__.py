"""Pluggable propose/refine segmentation backends and interaction encoding."""

from .base import (
    BackendCapabilityError,
    BackendDescriptor,
    SegmentationBackend,
    UnknownBackendError,
    available_backends,
    get_backend,
    graphcut_segment,
    propose,
    refine,
)
from .encoding import (
    EMPTY_CHANNEL_VALUE,
    InteractionChannels,
    encode_interactions,
    enforce_constraints,
)
from .graphcut import EmptyScribbleClassError, FlowOverflowError, GraphCut
from .refiner import GeodesicRefiner
from .threshold import UptakeThreshold

__all__ = [
    "BackendCapabilityError",
    "BackendDescriptor",
    "EMPTY_CHANNEL_VALUE",
    "EmptyScribbleClassError",
    "FlowOverflowError",
    "GeodesicRefiner",
    "GraphCut",
    "InteractionChannels",
    "SegmentationBackend",
    "UnknownBackendError",
    "UptakeThreshold",
    "available_backends",
    "encode_interactions",
    "enforce_constraints",
    "get_backend",
    "graphcut_segment",
    "propose",
    "refine",
]
