"""Core volumetric types: scalar volumes, binary masks, bounding boxes, Dice.

Arrays are indexed ``[x, y, z]`` with shape ``(W, H, D)``. The linear voxel
order used by every file format and wire encoding is x-fastest, i.e.
``array.ravel(order="F")``. Volumes carry physical voxel spacing in
millimeters and are treated as immutable once constructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.ndimage import map_coordinates

from .validation import Dims, as_mask, check_dims, check_same_shape, check_spacing


class EmptyMaskError(ValueError):
    """Raised when an operation requires at least one set voxel."""


@dataclass(frozen=True)
class Volume:
    """A 3-D scalar field with per-axis voxel spacing.

    ``data`` is a float32 array of shape ``(W, H, D)``; all values must be
    finite. The underlying buffer is marked read-only so volumes can be
    shared freely across concurrent tasks.
    """

    data: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != np.float32:
            data = data.astype(np.float32)
        if data.ndim != 3 or any(d < 1 for d in data.shape):
            raise ValueError(f"volume data must be 3-D with positive dims, got shape {data.shape}")
        if not np.isfinite(data).all():
            raise ValueError("volume data contains NaN or Inf")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing", check_spacing(self.spacing))
        data.setflags(write=False)

    @property
    def dims(self) -> Dims:
        return self.data.shape  # type: ignore[return-value]

    def linear(self) -> np.ndarray:
        """Values in the canonical x-fastest linear order."""
        return self.data.ravel(order="F")


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned voxel box: ``mins`` inclusive, ``maxs`` exclusive."""

    mins: tuple[int, int, int]
    maxs: tuple[int, int, int]

    def __post_init__(self):
        mins = tuple(int(v) for v in self.mins)
        maxs = tuple(int(v) for v in self.maxs)
        if any(lo < 0 for lo in mins) or any(lo >= hi for lo, hi in zip(mins, maxs)):
            raise ValueError(f"invalid bounding box {mins}..{maxs}")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @classmethod
    def full(cls, dims: Dims) -> "BoundingBox":
        return cls((0, 0, 0), check_dims(dims))

    @property
    def shape(self) -> Dims:
        return tuple(hi - lo for lo, hi in zip(self.mins, self.maxs))  # type: ignore[return-value]

    @property
    def num_voxels(self) -> int:
        return int(np.prod(self.shape))

    def slices(self) -> tuple[slice, slice, slice]:
        return tuple(slice(lo, hi) for lo, hi in zip(self.mins, self.maxs))  # type: ignore[return-value]

    def within(self, dims: Dims) -> bool:
        return all(hi <= d for hi, d in zip(self.maxs, dims))

    def contains_point(self, point) -> bool:
        return all(lo <= p < hi for lo, p, hi in zip(self.mins, point, self.maxs))

    def contains_mask(self, mask: np.ndarray) -> bool:
        """True when every set voxel of ``mask`` lies inside the box."""
        outside = np.ones(mask.shape, dtype=bool)
        outside[self.slices()] = False
        return not bool(np.any(mask & outside))

    def region_mask(self, dims: Dims) -> np.ndarray:
        region = np.zeros(dims, dtype=bool)
        region[self.slices()] = True
        return region


@dataclass(frozen=True)
class ModalityPair:
    """Co-registered anatomical (CT-like) and functional (PET-like) volumes.

    Both volumes must share one grid; use :func:`resample_to_grid` to bring
    the functional volume onto the anatomical grid before construction.
    """

    anatomical: Volume
    functional: Volume
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.anatomical.dims != self.functional.dims:
            raise ValueError(
                f"modality dims differ: {self.anatomical.dims} vs {self.functional.dims}"
            )
        if self.anatomical.spacing != self.functional.spacing:
            raise ValueError(
                f"modality spacing differs: {self.anatomical.spacing} vs {self.functional.spacing}"
            )

    @property
    def dims(self) -> Dims:
        return self.anatomical.dims

    @property
    def spacing(self) -> tuple[float, float, float]:
        return self.anatomical.spacing


def empty_mask(dims: Dims) -> np.ndarray:
    return np.zeros(check_dims(dims), dtype=bool)


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """Dice overlap 2|a∩b| / (|a|+|b|); defined as 1.0 for two empty masks."""
    a = as_mask(a, name="a")
    b = as_mask(b, name="b")
    check_same_shape(a, b, "masks")
    na = int(np.count_nonzero(a))
    nb = int(np.count_nonzero(b))
    if na + nb == 0:
        return 1.0
    inter = int(np.count_nonzero(a & b))
    return 2.0 * inter / (na + nb)


def bbox_of_mask(mask: np.ndarray) -> BoundingBox:
    """Tightest axis-aligned box containing every set voxel."""
    mask = as_mask(mask)
    if not mask.any():
        raise EmptyMaskError("cannot take bounding box of an empty mask")
    mins = []
    maxs = []
    for axis in range(3):
        profile = np.any(mask, axis=tuple(a for a in range(3) if a != axis))
        idx = np.flatnonzero(profile)
        mins.append(int(idx[0]))
        maxs.append(int(idx[-1]) + 1)
    return BoundingBox(tuple(mins), tuple(maxs))


def expand_bbox(box: BoundingBox, factor: float, dims: Dims) -> BoundingBox:
    """Scale each side of ``box`` by ``factor`` about its center, clip to ``dims``.

    New bounds are rounded outward to integers, then clipped to [0, dims].
    """
    if factor < 1.0:
        raise ValueError(f"expansion factor must be >= 1, got {factor}")
    dims = check_dims(dims)
    mins = []
    maxs = []
    for lo, hi, d in zip(box.mins, box.maxs, dims):
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo) * factor
        mins.append(max(0, int(math.floor(center - half))))
        maxs.append(min(d, int(math.ceil(center + half))))
    return BoundingBox(tuple(mins), tuple(maxs))


def largest_component(mask: np.ndarray) -> np.ndarray | None:
    """Largest 6-connected component of a mask, or None when empty.

    Size ties break toward the component whose label scipy assigns first
    (scan order), keeping the result deterministic.
    """
    mask = as_mask(mask)
    labels, count = ndimage.label(mask, structure=ndimage.generate_binary_structure(3, 1))
    if count == 0:
        return None
    sizes = ndimage.sum_labels(mask, labels, index=np.arange(1, count + 1))
    return labels == (int(np.argmax(sizes)) + 1)


def resample_to_grid(src: Volume, target_dims: Dims, target_spacing) -> Volume:
    """Trilinear resampling of ``src`` onto a new grid.

    Voxel centers sit at ``index * spacing`` with both origins aligned at
    voxel (0, 0, 0); sample positions outside the source take the nearest
    edge value.
    """
    target_dims = check_dims(target_dims)
    target_spacing = check_spacing(target_spacing)
    if src.dims == target_dims and src.spacing == target_spacing:
        return Volume(src.data.copy(), src.spacing)
    axes = [
        np.arange(n, dtype=np.float64) * ts / ss
        for n, ts, ss in zip(target_dims, target_spacing, src.spacing)
    ]
    grid = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([g.ravel() for g in grid])
    values = map_coordinates(src.data.astype(np.float64), coords, order=1, mode="nearest")
    return Volume(values.reshape(target_dims).astype(np.float32), target_spacing)
