"""Run-length encoding of binary masks over the x-fastest linear voxel order.

Two wire forms are used:

* scribble payloads: explicit ``[[start, length], ...]`` integer pairs in JSON;
* mask payloads: the same pairs flattened to little-endian uint32 and
  base64-encoded, which keeps large masks compact inside JSON.
"""

from __future__ import annotations

import base64

import numpy as np

from .validation import Dims, as_mask, check_dims


def rle_encode(mask: np.ndarray) -> list[list[int]]:
    """Encode a boolean mask as [start, length] runs over the linear order."""
    flat = as_mask(mask).ravel(order="F")
    if not flat.any():
        return []
    padded = np.concatenate(([False], flat, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    starts = edges[0::2]
    ends = edges[1::2]
    return [[int(s), int(e - s)] for s, e in zip(starts, ends)]


def rle_decode(runs, dims: Dims) -> np.ndarray:
    """Decode [start, length] runs into a boolean (W, H, D) mask."""
    dims = check_dims(dims)
    n = int(np.prod(dims))
    flat = np.zeros(n, dtype=bool)
    prev_end = 0
    for run in runs:
        start, length = int(run[0]), int(run[1])
        if length <= 0 or start < prev_end or start + length > n:
            raise ValueError(f"invalid run [{start}, {length}] for {n} voxels")
        flat[start : start + length] = True
        prev_end = start + length
    return flat.reshape(dims, order="F")


def mask_to_wire(mask: np.ndarray) -> dict:
    """JSON-safe mask payload: dims + base64 of uint32 LE run pairs."""
    mask = as_mask(mask)
    runs = np.asarray(rle_encode(mask), dtype=np.uint32).reshape(-1)
    return {
        "dims": list(mask.shape),
        "count": int(np.count_nonzero(mask)),
        "rle_b64": base64.b64encode(runs.astype("<u4").tobytes()).decode("ascii"),
    }


def wire_to_mask(payload: dict) -> np.ndarray:
    dims = check_dims(payload["dims"])
    raw = base64.b64decode(payload["rle_b64"])
    runs = np.frombuffer(raw, dtype="<u4").reshape(-1, 2)
    mask = rle_decode(runs.tolist(), dims)
    if "count" in payload and int(payload["count"]) != int(np.count_nonzero(mask)):
        raise ValueError("mask payload count does not match its runs")
    return mask
