"""Gaussian random projection of local features to a compact dimension.

The projection matrix has i.i.d. standard-normal entries scaled by
``1 / sqrt(target_dim)``, which approximately preserves pairwise angles
while cutting the per-vector cost of every downstream distance
computation. One matrix serves all local-feature positions.

Entries come from a fixed, documented generator so that a (source_dim,
target_dim, seed) triple always yields the same matrix, bit for bit, on
any platform: a 64-bit counter hashed with the splitmix64 finalizer
supplies uniforms, and Box-Muller turns uniform pairs into normals.
Entry ``t`` of the row-major matrix uses uniform words ``2*(t//2)`` and
``2*(t//2) + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ConfigError, FeatureSequence, ShapeMismatchError, Trajectory

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 2.0**-53
_CHUNK = 1 << 20


def _mix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over a uint64 array (wrapping arithmetic)."""
    z = (x ^ (x >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def counter_uniforms(seed: int, index: np.ndarray) -> np.ndarray:
    """Uniform doubles in (0, 1) for the given 64-bit counter positions."""
    base = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    words = _mix64(base + (index.astype(np.uint64) + np.uint64(1)) * _GOLDEN)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _U53


def counter_normals(seed: int, start: int, count: int) -> np.ndarray:
    """Standard normals at positions [start, start + count) of the stream."""
    t = np.arange(start, start + count, dtype=np.uint64)
    pair = t >> np.uint64(1)
    u1 = counter_uniforms(seed, pair * np.uint64(2))
    u2 = counter_uniforms(seed, pair * np.uint64(2) + np.uint64(1))
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * math.pi * u2
    return np.where((t & np.uint64(1)) == 0, radius * np.cos(angle), radius * np.sin(angle))


@dataclass(frozen=True)
class ProjectionSpec:
    """Fully determines one projection matrix.

    With ``identity`` set the projection is the identity map (dimensions
    must agree); useful to push features through the projected code path
    without changing them.
    """

    source_dim: int
    target_dim: int = 512
    seed: int = 0
    identity: bool = False

    def __post_init__(self):
        if self.source_dim < 1 or self.target_dim < 1:
            raise ConfigError(
                f"dimensions must be >= 1, got {self.source_dim} -> {self.target_dim}"
            )
        if self.target_dim > self.source_dim:
            raise ConfigError(
                f"target_dim {self.target_dim} exceeds source_dim {self.source_dim}"
            )
        if self.identity and self.target_dim != self.source_dim:
            raise ConfigError("identity projection requires target_dim == source_dim")


def projection_matrix(spec: ProjectionSpec) -> np.ndarray:
    """The (target_dim, source_dim) matrix for ``spec``, generated chunkwise."""
    if spec.identity:
        return np.eye(spec.target_dim)
    total = spec.target_dim * spec.source_dim
    out = np.empty(total)
    for lo in range(0, total, _CHUNK):
        hi = min(lo + _CHUNK, total)
        out[lo:hi] = counter_normals(spec.seed, lo, hi - lo)
    out *= 1.0 / math.sqrt(spec.target_dim)
    return out.reshape(spec.target_dim, spec.source_dim)


def project_features(features: np.ndarray, spec: ProjectionSpec) -> np.ndarray:
    """Project vectors along the last axis from source_dim to target_dim."""
    arr = np.asarray(features, dtype=np.float64)
    if arr.shape[-1] != spec.source_dim:
        raise ShapeMismatchError(
            f"features have dimension {arr.shape[-1]}, spec expects {spec.source_dim}"
        )
    if spec.identity:
        return arr.copy()
    return arr @ projection_matrix(spec).T


def project_sequence(seq: FeatureSequence, spec: ProjectionSpec) -> FeatureSequence:
    return FeatureSequence(project_features(seq.features, spec), image_id=seq.image_id)


def project_trajectory(traj: Trajectory, spec: ProjectionSpec) -> Trajectory:
    return Trajectory(project_features(traj.frames, spec), truth=traj.truth)
