from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scribbleseg import empty_mask, mask_to_wire, rle_decode, rle_encode, wire_to_mask


def test_empty_mask_encodes_to_no_runs():
    assert rle_encode(empty_mask((3, 3, 3))) == []


def test_single_voxel_run():
    m = empty_mask((2, 2, 2))
    m[1, 0, 0] = True  # linear index 1 in x-fastest order
    assert rle_encode(m) == [[1, 1]]


def test_runs_follow_linear_order():
    m = empty_mask((2, 2, 2))
    m[:, 0, 0] = True      # linear 0..1
    m[0, 1, 1] = True      # linear 0 + 2*(1 + 2*1) = 6
    assert rle_encode(m) == [[0, 2], [6, 1]]


def test_decode_rejects_overlaps_and_overruns():
    with pytest.raises(ValueError):
        rle_decode([[0, 2], [1, 1]], (2, 2, 2))
    with pytest.raises(ValueError):
        rle_decode([[7, 2]], (2, 2, 2))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**30 - 1), st.floats(0.05, 0.95))
def test_round_trip(seed, density):
    rng = np.random.default_rng(seed)
    mask = rng.random((4, 5, 3)) < density
    np.testing.assert_array_equal(rle_decode(rle_encode(mask), mask.shape), mask)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**30 - 1))
def test_wire_round_trip(seed):
    rng = np.random.default_rng(seed)
    mask = rng.random((6, 4, 5)) < 0.3
    payload = mask_to_wire(mask)
    assert payload["count"] == int(mask.sum())
    np.testing.assert_array_equal(wire_to_mask(payload), mask)
