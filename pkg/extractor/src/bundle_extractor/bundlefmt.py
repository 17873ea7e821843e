"""Writer for the placealign feature-bundle byte layout.

Implemented independently against the documented format so the two sides
of the interchange cross-check each other:

    magic "STAB" | version u16 | n u32 | W u16 | D u32 | projected u8 |
    projection seed u64 | payload n*W*D float32 LE | checksum u64

The checksum packs crc32(payload) in the high word and adler32(payload)
in the low word. Everything is little-endian.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

MAGIC = b"STAB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIHIBQ")
_FOOTER = struct.Struct("<Q")


def payload_checksum(payload: bytes) -> int:
    return (zlib.crc32(payload) << 32) | zlib.adler32(payload)


def write_bundle(path, frames: np.ndarray) -> None:
    """Write unprojected frames of shape (n, W, D) as a feature bundle."""
    arr = np.ascontiguousarray(frames, dtype="<f4")
    if arr.ndim != 3:
        raise ValueError(f"frames must be (n, W, D), got shape {arr.shape}")
    n, width, dim = arr.shape
    payload = arr.tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, n, width, dim, 0, 0))
        fh.write(payload)
        fh.write(_FOOTER.pack(payload_checksum(payload)))
