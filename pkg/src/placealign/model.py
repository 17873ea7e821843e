"""Core data model shared by all engine modules.

Conventions used throughout the package:

* a "local feature" is one of W vertical slices of an image's mid-layer
  activation tensor, flattened to a D-vector;
* every index (frame number, grid coordinate) is 0-based;
* distance matrices are plain float64 ndarrays, with ``np.inf`` marking
  cells excluded by the restricted-alignment band;
* arrays held by the dataclasses are adopted and frozen (made read-only),
  and every operation is a pure function over them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

ALIGN_MODES = ("adaptive", "vanilla", "holistic-cosine", "sliding-window")

PATH_STEPS = ((1, 0), (0, 1), (1, 1))


class ShapeMismatchError(ValueError):
    """Two feature containers disagree on their (W, D) layout."""


class ConfigError(ValueError):
    """Invalid parameter value or parameter combination."""


def _adopt(values, name: str, ndim: int, dtype=np.float64) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=dtype)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FeatureSequence:
    """One image described as W local feature vectors of dimension D.

    ``features`` has shape (W, D). Values coming from a rectified CNN layer
    are non-negative; after random projection they may be signed.
    """

    features: np.ndarray
    image_id: object = None

    def __post_init__(self):
        object.__setattr__(self, "features", _adopt(self.features, "features", 2))

    @property
    def width(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def flattened(self) -> np.ndarray:
        """All local features concatenated in position order."""
        return self.features.reshape(-1)


@dataclass(frozen=True)
class Trajectory:
    """Temporally ordered stack of feature sequences, shape (n, W, D).

    ``truth`` optionally maps each frame to its ground-truth reference
    index (-1 meaning "no true match exists").
    """

    frames: np.ndarray
    truth: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "frames", _adopt(self.frames, "frames", 3))
        if self.truth is not None:
            t = _adopt(self.truth, "truth", 1, dtype=np.int64)
            if len(t) != len(self.frames):
                raise ValueError(
                    f"truth has {len(t)} entries for {len(self.frames)} frames"
                )
            object.__setattr__(self, "truth", t)

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def width(self) -> int:
        return self.frames.shape[1]

    @property
    def dim(self) -> int:
        return self.frames.shape[2]

    def frame(self, t: int) -> FeatureSequence:
        return FeatureSequence(self.frames[t], image_id=t)

    def window(self, start: int, length: int) -> "Trajectory":
        """Contiguous sub-trajectory of ``length`` frames starting at ``start``."""
        if start < 0 or start + length > len(self):
            raise IndexError(
                f"window [{start}, {start + length}) outside trajectory of {len(self)}"
            )
        truth = None if self.truth is None else self.truth[start : start + length]
        return Trajectory(self.frames[start : start + length], truth)

    @classmethod
    def from_sequences(cls, seqs: Iterable[FeatureSequence]) -> "Trajectory":
        stacked = np.stack([s.features for s in seqs])
        return cls(stacked)


def point_distance(x, y) -> float:
    """Cosine distance ``1 - x.y / (|x| |y|)`` between two feature vectors.

    The result is clipped to [0, 2] against rounding. Zero vectors follow a
    total convention: two zero vectors have distance 0, a zero vector
    against a nonzero one has distance 1.
    """
    xv = np.asarray(x, dtype=np.float64).reshape(-1)
    yv = np.asarray(y, dtype=np.float64).reshape(-1)
    if xv.shape != yv.shape:
        raise ShapeMismatchError(
            f"vectors have different dimensions: {xv.shape[0]} vs {yv.shape[0]}"
        )
    if xv.size == 0:
        raise ShapeMismatchError("vectors must have dimension >= 1")
    nx = float(np.linalg.norm(xv))
    ny = float(np.linalg.norm(yv))
    if nx == 0.0 and ny == 0.0:
        return 0.0
    if nx == 0.0 or ny == 0.0:
        return 1.0
    d = 1.0 - float(np.dot(xv, yv)) / (nx * ny)
    return float(min(max(d, 0.0), 2.0))


@dataclass(frozen=True)
class WarpingPath:
    """Monotone, continuous grid path with per-point accumulation costs.

    ``points`` are (row, col) pairs from (0, 0) to the end point; ``costs``
    holds each point's contribution to the normalizer (1, or the diagonal
    weight where the weighted diagonal step strictly won).
    """

    points: tuple
    costs: np.ndarray

    def __post_init__(self):
        pts = tuple((int(i), int(j)) for i, j in self.points)
        object.__setattr__(self, "points", pts)
        costs = _adopt(self.costs, "costs", 1)
        if len(costs) != len(pts):
            raise ValueError(f"{len(costs)} costs for {len(pts)} path points")
        object.__setattr__(self, "costs", costs)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def total_cost(self) -> float:
        return float(self.costs.sum())

    @property
    def end(self) -> tuple:
        return self.points[-1]

    def validate(self, rows: int, cols: int, relaxed_end: bool = False) -> None:
        """Check boundary, continuity, monotonicity and length bounds.

        With ``relaxed_end`` the path may stop at any column of the last
        row (subsequence matching); otherwise it must reach the corner.
        """
        if self.points[0] != (0, 0):
            raise ValueError(f"path starts at {self.points[0]}, not (0, 0)")
        end_i, end_j = self.points[-1]
        if end_i != rows - 1:
            raise ValueError(f"path ends on row {end_i}, expected {rows - 1}")
        if not relaxed_end and end_j != cols - 1:
            raise ValueError(f"path ends on column {end_j}, expected {cols - 1}")
        if end_j >= cols:
            raise ValueError(f"path end column {end_j} outside grid of {cols}")
        for (i0, j0), (i1, j1) in zip(self.points, self.points[1:]):
            if (i1 - i0, j1 - j0) not in PATH_STEPS:
                raise ValueError(
                    f"invalid step ({i0}, {j0}) -> ({i1}, {j1}): "
                    "steps must advance by (1,0), (0,1) or (1,1)"
                )
        k = len(self.points)
        lo, hi = max(rows, end_j + 1), rows + end_j
        if not lo <= k <= hi:
            raise ValueError(f"path length {k} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class AlignmentResult:
    """Outcome of aligning two images: normalized distance plus the path.

    ``distance == cumulative / total_cost``; ``total_cost`` is the sum of
    the per-point path costs committed by the dynamic program.
    """

    distance: float
    path: WarpingPath | None
    cumulative: float
    total_cost: float
    weight: "object | None" = None

    def __post_init__(self):
        if self.path is not None:
            got = self.path.total_cost
            if not np.isclose(got, self.total_cost, rtol=0, atol=1e-9):
                raise ValueError(
                    f"path costs sum to {got}, result claims {self.total_cost}"
                )


@dataclass(frozen=True)
class AlignConfig:
    """Image-distance configuration.

    mode selects the spatial strategy: "adaptive" (weighted warping),
    "vanilla" (unweighted warping), "holistic-cosine" (no alignment,
    plain cosine over the concatenated features) or "sliding-window"
    (best horizontal offset of a fixed window). ``xi`` is the band
    half-width used when ``restricted`` is set; ``sigma`` scales the
    adaptive diagonal weight.
    """

    sigma: float = 1.0
    xi: int = 3
    mode: str = "adaptive"
    window_size: int = 4
    restricted: bool = False

    def __post_init__(self):
        if self.mode not in ALIGN_MODES:
            raise ConfigError(f"unknown mode {self.mode!r}, expected one of {ALIGN_MODES}")
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.xi < 1:
            raise ConfigError(f"xi must be >= 1, got {self.xi}")
        if self.window_size < 1:
            raise ConfigError(f"window_size must be >= 1, got {self.window_size}")
