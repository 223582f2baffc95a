"""Binary raster file formats.

LBL1 carries label maps: a 16-byte header (magic ``LBL1`` then width,
height, class_count as 32-bit little-endian unsigned) followed by
row-major 16-bit little-endian class ids, 0xFFFF meaning ignore. Binary
masks travel as LBL1 with class_count=2.

SCF1 is the float sidecar for confidence fields: same header layout
(magic ``SCF1``, width, height, reserved) with a row-major little-endian
float32 payload.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .raster import IGNORE_VALUE, BinaryMask, LabelMap, ScalarField

LBL_MAGIC = b"LBL1"
SCF_MAGIC = b"SCF1"
_HEADER = struct.Struct("<4sIII")


def write_label_map(path: str | Path, label_map: LabelMap) -> None:
    payload = np.ascontiguousarray(label_map.labels, dtype="<u2")
    header = _HEADER.pack(
        LBL_MAGIC, label_map.width, label_map.height, label_map.class_count
    )
    Path(path).write_bytes(header + payload.tobytes())


def read_label_map(path: str | Path) -> LabelMap:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, width, height, class_count = _HEADER.unpack_from(raw)
    if magic != LBL_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 2 * width * height
    if len(raw) != expected:
        raise ValueError(f"{path}: payload is {len(raw)} bytes, expected {expected}")
    labels = np.frombuffer(raw, dtype="<u2", offset=_HEADER.size).reshape(
        height, width
    )
    return LabelMap(labels.copy(), class_count)


def write_mask(path: str | Path, mask: BinaryMask) -> None:
    write_label_map(path, LabelMap(mask.bits.astype(np.uint16), class_count=2))


def read_mask(path: str | Path) -> BinaryMask:
    label_map = read_label_map(path)
    if label_map.class_count != 2:
        raise ValueError(f"{path}: mask file must have class_count=2")
    if (label_map.labels == IGNORE_VALUE).any():
        raise ValueError(f"{path}: mask file carries ignore pixels")
    return BinaryMask(label_map.labels.astype(bool))


def write_scalar_field(path: str | Path, field: ScalarField) -> None:
    payload = np.ascontiguousarray(field.values, dtype="<f4")
    header = _HEADER.pack(SCF_MAGIC, field.width, field.height, 0)
    Path(path).write_bytes(header + payload.tobytes())


def read_scalar_field(path: str | Path) -> ScalarField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, width, height, _ = _HEADER.unpack_from(raw)
    if magic != SCF_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 4 * width * height
    if len(raw) != expected:
        raise ValueError(f"{path}: payload is {len(raw)} bytes, expected {expected}")
    values = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(
        height, width
    )
    return ScalarField(values.astype(np.float64))
