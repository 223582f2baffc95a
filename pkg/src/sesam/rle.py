"""Run-length codec for binary masks on the oracle wire.

Row-major runs of alternating values, starting with the count of
0-pixels (so the first run may be 0). Each count is a variable-length
little-endian base-128 integer: low 7 bits per byte, high bit set on
all but the final byte.
"""

from __future__ import annotations

import numpy as np

from .errors import LengthMismatch, RunLengthOverflow
from .raster import BinaryMask

# A run never legitimately exceeds the pixel count of a u32 x u32 raster;
# 10 varint bytes (70 bits) is already out of bounds.
_MAX_VARINT_BYTES = 10


def mask_runs(mask: BinaryMask) -> np.ndarray:
    """Alternating run lengths of the flattened mask, zeros first."""
    flat = mask.bits.ravel()
    changes = np.flatnonzero(flat[1:] != flat[:-1])
    bounds = np.concatenate(([0], changes + 1, [flat.size]))
    runs = np.diff(bounds)
    if flat[0]:
        runs = np.concatenate(([0], runs))
    return runs.astype(np.int64)


def rle_encode(mask: BinaryMask) -> bytes:
    return _encode_varints(mask_runs(mask))


def rle_decode(data: bytes, width: int, height: int) -> BinaryMask:
    if width <= 0 or height <= 0:
        raise LengthMismatch(f"degenerate dimensions {width}x{height}")
    runs = _decode_varints(data)
    total = int(runs.sum())
    if total != width * height:
        raise LengthMismatch(
            f"runs cover {total} pixels, raster has {width * height}"
        )
    values = (np.arange(runs.size, dtype=np.uint8) & 1).astype(bool)
    flat = np.repeat(values, runs)
    return BinaryMask(flat.reshape(height, width))


def _encode_varints(values: np.ndarray) -> bytes:
    if values.size == 0:
        return b""
    if int(values.max()) < 0x80:
        return values.astype(np.uint8).tobytes()
    out = bytearray()
    for v in values.tolist():
        if v >> (7 * _MAX_VARINT_BYTES):
            raise RunLengthOverflow(f"run of {v} pixels exceeds codec bound")
        while v >= 0x80:
            out.append((v & 0x7F) | 0x80)
            v >>= 7
        out.append(v)
    return bytes(out)


def _decode_varints(data: bytes) -> np.ndarray:
    if len(data) == 0:
        raise LengthMismatch("empty run-length payload")
    arr = np.frombuffer(data, dtype=np.uint8)
    terminal = (arr & 0x80) == 0
    if not terminal[-1]:
        raise LengthMismatch("payload ends inside a varint")
    ends = np.flatnonzero(terminal)
    if ends.size == len(data):  # every varint is one byte
        return arr.astype(np.int64)
    starts = np.concatenate(([0], ends[:-1] + 1))
    lengths = ends - starts + 1
    if int(lengths.max()) > _MAX_VARINT_BYTES:
        raise RunLengthOverflow("varint longer than codec bound")
    values = np.empty(ends.size, dtype=np.int64)
    payload = (arr & 0x7F).astype(np.int64)
    for i, (s, e) in enumerate(zip(starts.tolist(), ends.tolist())):
        v = 0
        for shift, j in enumerate(range(s, e + 1)):
            v |= payload[j] << (7 * shift)
        values[i] = v
    return values
