from __future__ import annotations

import json
import struct

import numpy as np
import pytest

from scribbleseg import Volume, load_volume, save_volume
from scribbleseg.io import (
    SizeMismatchError,
    UnreadableFileError,
    UnsupportedDatatypeError,
    load_mask_nifti,
    save_mask_nifti,
)


def reference_nifti_bytes(data: np.ndarray, spacing, datatype: int, bitpix: int,
                          scl_slope: float = 0.0, scl_inter: float = 0.0) -> bytes:
    """Hand-assembled NIfTI-1 file, built straight from the format layout."""
    header = bytearray(348)
    struct.pack_into("<i", header, 0, 348)
    dims = data.shape
    struct.pack_into("<8h", header, 40, 3, dims[0], dims[1], dims[2], 1, 1, 1, 1)
    struct.pack_into("<h", header, 70, datatype)
    struct.pack_into("<h", header, 72, bitpix)
    struct.pack_into("<8f", header, 76, 1.0, *spacing, 0.0, 0.0, 0.0, 0.0)
    struct.pack_into("<f", header, 108, 352.0)
    struct.pack_into("<2f", header, 112, scl_slope, scl_inter)
    header[344:348] = b"n+1\x00"
    payload = data.ravel(order="F").tobytes()
    return bytes(header) + b"\x00" * 4 + payload


class TestNiftiRead:
    def test_reads_reference_float32(self, tmp_path):
        rng = np.random.default_rng(42)
        data = rng.random((3, 5, 7)).astype(np.float32)
        path = tmp_path / "ref.nii"
        path.write_bytes(reference_nifti_bytes(data, (2.0, 2.0, 3.0), 16, 32))
        vol = load_volume(path)
        assert vol.dims == (3, 5, 7)
        assert vol.spacing == (2.0, 2.0, 3.0)
        np.testing.assert_array_equal(vol.data, data)

    def test_applies_slope_and_intercept(self, tmp_path):
        raw = np.arange(-4, 4, dtype=np.int16).reshape((2, 2, 2))
        path = tmp_path / "scaled.nii"
        path.write_bytes(reference_nifti_bytes(raw, (1.0, 1.0, 1.0), 4, 16, 2.0, 10.0))
        vol = load_volume(path)
        np.testing.assert_allclose(vol.data, raw.astype(np.float64) * 2.0 + 10.0)

    def test_reads_uint8(self, tmp_path):
        raw = (np.arange(27) % 2).astype(np.uint8).reshape((3, 3, 3))
        path = tmp_path / "mask.nii"
        path.write_bytes(reference_nifti_bytes(raw, (1.0, 1.0, 1.0), 2, 8))
        vol = load_volume(path)
        np.testing.assert_array_equal(vol.data, raw.astype(np.float32))

    def test_truncated_data_is_size_mismatch(self, tmp_path):
        data = np.zeros((4, 4, 4), dtype=np.float32)
        blob = reference_nifti_bytes(data, (1.0, 1.0, 1.0), 16, 32)
        path = tmp_path / "short.nii"
        path.write_bytes(blob[:-40])
        with pytest.raises(SizeMismatchError):
            load_volume(path)

    def test_unsupported_datatype_code(self, tmp_path):
        data = np.zeros((2, 2, 2), dtype=np.complex64)
        blob = reference_nifti_bytes(data.view(np.float32)[..., :2], (1, 1, 1), 32, 64)
        path = tmp_path / "cplx.nii"
        path.write_bytes(blob)
        with pytest.raises(UnsupportedDatatypeError):
            load_volume(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(UnreadableFileError):
            load_volume(tmp_path / "nope.nii")

    def test_garbage_header(self, tmp_path):
        path = tmp_path / "junk.nii"
        path.write_bytes(b"\x00" * 500)
        with pytest.raises(UnreadableFileError):
            load_volume(path)

    def test_writer_reader_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        vol = Volume(rng.random((5, 4, 6)).astype(np.float32), (1.5, 0.8, 2.5))
        path = save_volume(vol, tmp_path / "rt.nii")
        back = load_volume(path)
        assert back.dims == vol.dims
        np.testing.assert_allclose(back.spacing, vol.spacing, rtol=1e-6)
        np.testing.assert_array_equal(back.data, vol.data)

    def test_mask_round_trip(self, tmp_path):
        rng = np.random.default_rng(8)
        mask = rng.random((6, 6, 6)) < 0.3
        path = save_mask_nifti(mask, (1.0, 1.0, 1.0), tmp_path / "m.nii")
        np.testing.assert_array_equal(load_mask_nifti(path), mask)


class TestRawJson:
    def test_zero_volume(self, tmp_path):
        vol = Volume(np.zeros((4, 4, 4), dtype=np.float32))
        path = save_volume(vol, tmp_path / "zeros.json")
        back = load_volume(path)
        assert back.dims == (4, 4, 4)
        assert back.spacing == (1.0, 1.0, 1.0)
        assert np.count_nonzero(back.data) == 0 and back.data.size == 64

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(9)
        vol = Volume(rng.random((3, 7, 2)).astype(np.float32), (0.5, 1.25, 3.0))
        back = load_volume(save_volume(vol, tmp_path / "v.json"))
        assert back.data.tobytes() == vol.data.tobytes()
        assert back.spacing == vol.spacing

    def test_payload_linear_order_is_x_fastest(self, tmp_path):
        data = np.arange(24, dtype=np.float32).reshape((2, 3, 4))
        save_volume(Volume(data), tmp_path / "o.json")
        raw = np.fromfile(tmp_path / "o.bin", dtype="<f4")
        np.testing.assert_array_equal(raw, data.ravel(order="F"))

    def test_size_mismatch(self, tmp_path):
        vol = Volume(np.zeros((4, 4, 4), dtype=np.float32))
        path = save_volume(vol, tmp_path / "bad.json")
        payload = tmp_path / "bad.bin"
        payload.write_bytes(payload.read_bytes()[:-8])
        with pytest.raises(SizeMismatchError):
            load_volume(path)

    def test_wrong_dtype_field(self, tmp_path):
        path = tmp_path / "h.json"
        path.write_text(json.dumps({"dims": [2, 2, 2], "spacing": [1, 1, 1], "dtype": "f64"}))
        with pytest.raises(UnsupportedDatatypeError):
            load_volume(path)
