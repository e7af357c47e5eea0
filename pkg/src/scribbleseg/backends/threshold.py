"""Proposal backend: threshold the functional volume at an uptake level."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..volume import ModalityPair, empty_mask, largest_component
from .base import SegmentationBackend, register_backend


@register_backend
class UptakeThreshold(SegmentationBackend):
    """Keep the largest blob of functional uptake above a threshold.

    With ``threshold`` unset, the cutoff is mean + k·stddev over the whole
    functional volume (strict inequality, so a constant volume proposes
    nothing). The surviving component is closed with a radius-1 structuring
    element to fill pinholes.
    """

    name = "uptake_threshold"
    supports_refine = False

    def __init__(self, threshold: float | None = None, k: float = 2.0):
        self.threshold = threshold
        self.k = k

    def propose(self, pair: ModalityPair) -> np.ndarray:
        values = pair.functional.data.astype(np.float64)
        if self.threshold is not None:
            cutoff = float(self.threshold)
        else:
            cutoff = float(values.mean() + self.k * values.std())
        hot = values > cutoff
        component = largest_component(hot)
        if component is None:
            return empty_mask(pair.dims)
        return ndimage.binary_closing(
            component, structure=ndimage.generate_binary_structure(3, 1)
        )

    predict = propose
