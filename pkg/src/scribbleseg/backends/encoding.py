"""Scribble-to-channel encoding and user-constraint enforcement.

Each scribble class is encoded as a geodesic distance map computed only
inside a box around that class's scribbles, min-max normalized to [0, 1]
there and held at 1.0 outside. A class with no scribbles yields a constant
map at 1.0 — "no annotation anywhere near" — which makes refinement with no
interactions a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geodesic import DistanceMap, GeodesicConfig, determine_roi, gdt_roi, minmax_normalize
from ..simulate import ScribbleSet
from ..validation import Dims, as_mask
from ..volume import ModalityPair, Volume, empty_mask

EMPTY_CHANNEL_VALUE = 1.0


@dataclass(frozen=True)
class InteractionChannels:
    """Refinement input: encoded scribble classes plus the previous mask."""

    fg_gdt: DistanceMap
    bg_gdt: DistanceMap
    prev_mask: np.ndarray

    def __post_init__(self):
        dims = self.prev_mask.shape
        if self.fg_gdt.dims != dims or self.bg_gdt.dims != dims:
            raise ValueError("channel dims do not match the previous mask")

    @property
    def dims(self) -> Dims:
        return self.prev_mask.shape  # type: ignore[return-value]

    def union_roi_mask(self) -> np.ndarray:
        """Voxels covered by at least one scribble class's box."""
        region = empty_mask(self.dims)
        for channel in (self.fg_gdt, self.bg_gdt):
            if channel.roi is not None:
                region[channel.roi.slices()] = True
        return region

    def seed_masks(self) -> tuple[np.ndarray, np.ndarray]:
        """Recover the scribble masks: exactly the zero-distance voxels."""
        fg = self.fg_gdt.data == 0.0 if self.fg_gdt.roi is not None else empty_mask(self.dims)
        bg = self.bg_gdt.data == 0.0 if self.bg_gdt.roi is not None else empty_mask(self.dims)
        return fg, bg


def _empty_channel(dims: Dims, spacing) -> DistanceMap:
    return DistanceMap(
        np.full(dims, EMPTY_CHANNEL_VALUE, dtype=np.float64),
        spacing,
        roi=None,
        outside_value=EMPTY_CHANNEL_VALUE,
    )


def _encode_class(pair: ModalityPair, class_mask: np.ndarray, cfg: GeodesicConfig,
                  roi_expansion: float) -> DistanceMap:
    if not class_mask.any():
        return _empty_channel(pair.dims, pair.spacing)
    roi = determine_roi(class_mask, None, roi_expansion, pair.dims)
    # normalize intensities over the computed region so lam is scale-free
    base = minmax_normalize(pair.anatomical.data, roi).astype(np.float32)
    raw = gdt_roi(Volume(base, pair.spacing), class_mask, cfg, roi, outside_value=np.inf)
    normalized = np.full(pair.dims, EMPTY_CHANNEL_VALUE, dtype=np.float64)
    sl = roi.slices()
    block = raw.data[sl]
    peak = float(block.max())
    normalized[sl] = block / peak if peak > 0 else 0.0
    return DistanceMap(normalized, pair.spacing, roi=roi, outside_value=EMPTY_CHANNEL_VALUE,
                       sweep_visits=raw.sweep_visits)


def encode_interactions(
    pair: ModalityPair,
    scribbles: ScribbleSet,
    cfg: GeodesicConfig = GeodesicConfig(),
    roi_expansion: float = 2.0,
    prev_mask: np.ndarray | None = None,
) -> InteractionChannels:
    """Encode a scribble set as normalized distance channels.

    The transform runs on the anatomical volume only, within a box around
    each scribble class expanded by ``roi_expansion``.
    """
    if scribbles.dims != pair.dims:
        raise ValueError(f"scribble dims {scribbles.dims} do not match pair dims {pair.dims}")
    prev = empty_mask(pair.dims) if prev_mask is None else as_mask(prev_mask, pair.dims, "prev_mask")
    return InteractionChannels(
        fg_gdt=_encode_class(pair, scribbles.foreground, cfg, roi_expansion),
        bg_gdt=_encode_class(pair, scribbles.background, cfg, roi_expansion),
        prev_mask=prev,
    )


def enforce_constraints(mask: np.ndarray, scribbles: ScribbleSet) -> np.ndarray:
    """Force scribbled voxels to their user-assigned class."""
    mask = as_mask(mask, scribbles.dims, "mask")
    return (mask | scribbles.foreground) & ~scribbles.background
