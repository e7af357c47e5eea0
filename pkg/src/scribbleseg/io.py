"""Volume file I/O: a minimal NIfTI-1 subset and a JSON+binary raw format.

NIfTI-1 support covers single-file ``.nii`` volumes with datatypes uint8,
int16, float32 and float64, no compression; ``pixdim`` supplies spacing and
``scl_slope``/``scl_inter`` are applied on load. Orientation metadata
(qform/sform) is ignored.

The raw_json format is a UTF-8 JSON header ``{dims, spacing, dtype: "f32",
payload}`` plus a sibling binary file holding little-endian float32 voxels in
x-fastest order. It round-trips bit-exactly and needs no third-party reader.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .validation import check_dims, check_spacing
from .volume import Volume


class UnreadableFileError(IOError):
    """File missing, truncated header, or not a recognized volume file."""


class UnsupportedDatatypeError(ValueError):
    """Voxel datatype code outside the supported subset."""


class SizeMismatchError(ValueError):
    """Header-declared voxel count disagrees with the data section."""


NIFTI_HEADER_SIZE = 348
NIFTI_VOX_OFFSET = 352
_NIFTI_DTYPES = {2: np.uint8, 4: np.int16, 16: np.float32, 64: np.float64}
_NIFTI_BITPIX = {2: 8, 4: 16, 16: 32, 64: 64}


def _detect_format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".nii":
        return "nifti1"
    if suffix == ".json":
        return "raw_json"
    raise UnreadableFileError(f"cannot infer volume format from {path.name!r}")


def load_volume(path, format: str | None = None) -> Volume:
    """Load a volume from ``path`` in the named (or extension-inferred) format."""
    path = Path(path)
    if not path.is_file():
        raise UnreadableFileError(f"no such file: {path}")
    fmt = format or _detect_format(path)
    if fmt == "nifti1":
        return _load_nifti(path)
    if fmt == "raw_json":
        return _load_raw_json(path)
    raise ValueError(f"unknown volume format {fmt!r}")


def save_volume(volume: Volume, path, format: str | None = None) -> Path:
    """Write ``volume`` to ``path``; returns the header/primary file path."""
    path = Path(path)
    fmt = format or _detect_format(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "nifti1":
        _save_nifti(volume.data.astype(np.float32), volume.spacing, path, datatype=16)
    elif fmt == "raw_json":
        _save_raw_json(volume, path)
    else:
        raise ValueError(f"unknown volume format {fmt!r}")
    return path


def save_mask_nifti(mask: np.ndarray, spacing, path) -> Path:
    """Persist a boolean mask as a uint8 NIfTI-1 volume."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _save_nifti(mask.astype(np.uint8), check_spacing(spacing), path, datatype=2)
    return path


def load_mask_nifti(path) -> np.ndarray:
    return load_volume(path, "nifti1").data > 0.5


def _load_nifti(path: Path) -> Volume:
    blob = path.read_bytes()
    if len(blob) < NIFTI_HEADER_SIZE:
        raise UnreadableFileError(f"{path.name}: truncated NIfTI header ({len(blob)} bytes)")
    if blob[:2] == b"\x1f\x8b":
        raise UnreadableFileError(f"{path.name}: compressed NIfTI is not supported")
    for order in ("<", ">"):
        (sizeof_hdr,) = struct.unpack_from(order + "i", blob, 0)
        if sizeof_hdr == NIFTI_HEADER_SIZE:
            break
    else:
        raise UnreadableFileError(f"{path.name}: not a NIfTI-1 file (bad sizeof_hdr)")
    magic = blob[344:348]
    if magic not in (b"n+1\x00", b"ni1\x00"):
        raise UnreadableFileError(f"{path.name}: bad NIfTI magic {magic!r}")
    if magic == b"ni1\x00":
        raise UnreadableFileError(f"{path.name}: two-file NIfTI (.hdr/.img) is not supported")

    dim = struct.unpack_from(order + "8h", blob, 40)
    datatype, bitpix = struct.unpack_from(order + "2h", blob, 70)
    pixdim = struct.unpack_from(order + "8f", blob, 76)
    (vox_offset,) = struct.unpack_from(order + "f", blob, 108)
    scl_slope, scl_inter = struct.unpack_from(order + "2f", blob, 112)

    ndim = dim[0]
    if ndim < 1 or ndim > 7:
        raise UnreadableFileError(f"{path.name}: invalid dim[0]={ndim}")
    if any(dim[k] > 1 for k in range(4, ndim + 1)):
        raise UnsupportedDatatypeError(f"{path.name}: >3-D volumes are not supported")
    dims = check_dims(tuple(max(1, dim[k]) for k in (1, 2, 3)))
    if datatype not in _NIFTI_DTYPES:
        raise UnsupportedDatatypeError(f"{path.name}: unsupported datatype code {datatype}")
    if bitpix != _NIFTI_BITPIX[datatype]:
        raise UnsupportedDatatypeError(
            f"{path.name}: bitpix {bitpix} inconsistent with datatype {datatype}"
        )
    spacing = check_spacing(tuple(pixdim[k] if pixdim[k] > 0 else 1.0 for k in (1, 2, 3)))

    offset = int(vox_offset) if vox_offset >= NIFTI_HEADER_SIZE else NIFTI_VOX_OFFSET
    dtype = np.dtype(_NIFTI_DTYPES[datatype]).newbyteorder(order)
    count = int(np.prod(dims))
    expected = count * dtype.itemsize
    data_section = blob[offset:]
    if len(data_section) < expected:
        raise SizeMismatchError(
            f"{path.name}: data section holds {len(data_section)} bytes, "
            f"header implies {expected}"
        )
    raw = np.frombuffer(data_section[:expected], dtype=dtype)
    values = raw.astype(np.float64)
    if scl_slope not in (0.0, 1.0) or scl_inter != 0.0:
        slope = scl_slope if scl_slope != 0.0 else 1.0
        values = values * slope + scl_inter
    return Volume(values.reshape(dims, order="F").astype(np.float32), spacing)


def _save_nifti(data: np.ndarray, spacing, path: Path, datatype: int) -> None:
    dims = data.shape
    header = bytearray(NIFTI_HEADER_SIZE)
    struct.pack_into("<i", header, 0, NIFTI_HEADER_SIZE)
    struct.pack_into("<8h", header, 40, 3, dims[0], dims[1], dims[2], 1, 1, 1, 1)
    struct.pack_into("<2h", header, 70, datatype, _NIFTI_BITPIX[datatype])
    struct.pack_into("<8f", header, 76, 1.0, spacing[0], spacing[1], spacing[2], 0, 0, 0, 0)
    struct.pack_into("<f", header, 108, float(NIFTI_VOX_OFFSET))
    struct.pack_into("<2f", header, 112, 1.0, 0.0)
    struct.pack_into("<b", header, 123, 2)  # spatial units: millimeters
    header[344:348] = b"n+1\x00"
    with open(path, "wb") as fh:
        fh.write(bytes(header))
        fh.write(b"\x00\x00\x00\x00")  # no header extensions
        fh.write(np.ascontiguousarray(data.ravel(order="F")).tobytes())


def _raw_payload_path(header_path: Path, header: dict | None = None) -> Path:
    name = (header or {}).get("payload", header_path.stem + ".bin")
    return header_path.parent / name


def _load_raw_json(path: Path) -> Volume:
    try:
        header = json.loads(path.read_text("utf-8"))
    except (ValueError, OSError) as exc:
        raise UnreadableFileError(f"{path.name}: cannot parse raw_json header: {exc}") from exc
    if header.get("dtype") != "f32":
        raise UnsupportedDatatypeError(f"{path.name}: dtype {header.get('dtype')!r} != 'f32'")
    dims = check_dims(header["dims"])
    spacing = check_spacing(header["spacing"])
    payload = _raw_payload_path(path, header)
    if not payload.is_file():
        raise UnreadableFileError(f"missing raw_json payload: {payload}")
    raw = np.fromfile(payload, dtype="<f4")
    if raw.size != int(np.prod(dims)):
        raise SizeMismatchError(
            f"{payload.name}: payload holds {raw.size} voxels, header implies {int(np.prod(dims))}"
        )
    return Volume(raw.reshape(dims, order="F"), spacing)


def _save_raw_json(volume: Volume, path: Path) -> None:
    payload = _raw_payload_path(path)
    header = {
        "dims": list(volume.dims),
        "spacing": list(volume.spacing),
        "dtype": "f32",
        "payload": payload.name,
    }
    path.write_text(json.dumps(header, indent=2) + "\n", "utf-8")
    volume.data.astype("<f4").ravel(order="F").tofile(payload)
