"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

Dims = tuple[int, int, int]


def check_dims(dims) -> Dims:
    """Validate a (W, H, D) voxel-count triple and return it as a tuple of ints."""
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise ValueError(f"dims must be three positive integers, got {dims!r}")
    return dims


def check_spacing(spacing) -> tuple[float, float, float]:
    """Validate a (sx, sy, sz) voxel spacing triple in millimeters."""
    spacing = tuple(float(s) for s in spacing)
    if len(spacing) != 3 or any(not np.isfinite(s) or s <= 0 for s in spacing):
        raise ValueError(f"spacing must be three positive finite floats, got {spacing!r}")
    return spacing


def as_mask(arr: np.ndarray, dims: Dims | None = None, name: str = "mask") -> np.ndarray:
    """Coerce to a boolean (W, H, D) array, optionally checking its shape."""
    mask = np.asarray(arr)
    if mask.dtype != bool:
        mask = mask.astype(bool)
    if mask.ndim != 3:
        raise ValueError(f"{name} must be a 3-D array, got shape {mask.shape}")
    if dims is not None and mask.shape != tuple(dims):
        raise ValueError(f"{name} has shape {mask.shape}, expected {tuple(dims)}")
    return mask


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "arrays") -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what} have mismatched shapes: {a.shape} vs {b.shape}")
