from __future__ import annotations

import numpy as np
import pytest

from scribbleseg import Ellipsoid, Volume, calc_ellipsoid, make_rng


@pytest.fixture
def rng():
    return make_rng(1234)


def random_volume(dims, rng, spacing=(1.0, 1.0, 1.0)) -> Volume:
    return Volume(rng.random(dims).astype(np.float32), spacing)


def blob_mask(dims, center=None, axes=None) -> np.ndarray:
    """A deterministic ellipsoidal blob roughly centered in the volume."""
    center = center or tuple(d // 2 for d in dims)
    axes = axes or tuple(max(1.5, d / 5) for d in dims)
    return calc_ellipsoid(Ellipsoid(center, axes), dims)
