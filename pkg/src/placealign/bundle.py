"""Feature-bundle binary format and ground-truth table I/O.

A bundle stores one trajectory of local features:

=====================  =======================================
magic                  4 bytes, ``b"STAB"``
format version         u16 little-endian
frame count n          u32
local features W       u16
feature dimension D    u32
projected flag         u8 (1 when features were projected)
projection seed        u64 (0 when unprojected)
payload                n * W * D float32 little-endian values,
                       frame-major, then position, then channel
checksum               u64 over the payload bytes
=====================  =======================================

The checksum packs CRC-32 of the payload into the high word and the
Adler-32 into the low word; the CRC component alone guarantees that any
single corrupted byte is detected. All numbers are little-endian.

The ground-truth table is delimited text: one ``query_index,reference_index``
row per query frame, indices contiguous from 0, reference -1 meaning the
query has no true match. Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .model import ShapeMismatchError, Trajectory

MAGIC = b"STAB"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sHIHIBQ")
_FOOTER = struct.Struct("<Q")


class BundleFormatError(ValueError):
    """File is not a readable feature bundle."""


class ChecksumError(BundleFormatError):
    """Payload bytes do not match the stored checksum."""


class SeedMismatchError(ValueError):
    """Two bundles were projected under different projections."""


def payload_checksum(payload: bytes) -> int:
    return (zlib.crc32(payload) << 32) | zlib.adler32(payload)


@dataclass(frozen=True)
class FeatureBundle:
    """In-memory image of one bundle file; frames kept at storage precision."""

    frames: np.ndarray  # (n, W, D) float32
    projected: bool = False
    projection_seed: int = 0
    version: int = FORMAT_VERSION

    def __post_init__(self):
        arr = np.ascontiguousarray(self.frames, dtype=np.float32)
        if arr.ndim != 3:
            raise ValueError(f"frames must be (n, W, D), got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "frames", arr)

    @property
    def n(self) -> int:
        return self.frames.shape[0]

    @property
    def width(self) -> int:
        return self.frames.shape[1]

    @property
    def dim(self) -> int:
        return self.frames.shape[2]

    def to_trajectory(self, truth=None) -> Trajectory:
        """Upcast to the float64 working representation."""
        return Trajectory(self.frames.astype(np.float64), truth)


def write_bundle(path, bundle: FeatureBundle) -> None:
    payload = bundle.frames.astype("<f4", copy=False).tobytes()
    header = _HEADER.pack(
        MAGIC,
        bundle.version,
        bundle.n,
        bundle.width,
        bundle.dim,
        1 if bundle.projected else 0,
        bundle.projection_seed & 0xFFFFFFFFFFFFFFFF,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.write(_FOOTER.pack(payload_checksum(payload)))


def read_bundle(path) -> FeatureBundle:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size + _FOOTER.size:
        raise BundleFormatError(f"{path}: truncated file ({len(raw)} bytes)")
    magic, version, n, width, dim, projected, seed = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BundleFormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise BundleFormatError(f"{path}: unsupported format version {version}")
    expected = n * width * dim * 4
    body = raw[_HEADER.size : -_FOOTER.size]
    if len(body) != expected:
        raise BundleFormatError(
            f"{path}: payload is {len(body)} bytes, header requires {expected}"
        )
    (stored,) = _FOOTER.unpack_from(raw, len(raw) - _FOOTER.size)
    if payload_checksum(body) != stored:
        raise ChecksumError(f"{path}: payload checksum mismatch")
    frames = np.frombuffer(body, dtype="<f4").reshape(n, width, dim)
    return FeatureBundle(frames, projected=bool(projected), projection_seed=seed)


def check_compatible(a: FeatureBundle, b: FeatureBundle) -> None:
    """Bundles can be matched only with equal layout and equal projection."""
    if (a.width, a.dim) != (b.width, b.dim):
        raise ShapeMismatchError(
            f"bundle layouts differ: ({a.width}, {a.dim}) vs ({b.width}, {b.dim})"
        )
    if a.projected != b.projected or (
        a.projected and a.projection_seed != b.projection_seed
    ):
        raise SeedMismatchError(
            "bundles carry different projections: "
            f"projected={a.projected} seed={a.projection_seed} vs "
            f"projected={b.projected} seed={b.projection_seed}"
        )


def write_ground_truth(path, truth, header_lines=()) -> None:
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        for q, r in enumerate(np.asarray(truth, dtype=np.int64)):
            fh.write(f"{q},{int(r)}\n")


def read_ground_truth(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'query,reference'")
            rows.append((int(parts[0]), int(parts[1])))
    if not rows:
        raise ValueError(f"{path}: empty ground-truth table")
    queries = [q for q, _ in rows]
    if queries != list(range(len(rows))):
        raise ValueError(f"{path}: query indices must be contiguous from 0")
    return np.array([r for _, r in rows], dtype=np.int64)
