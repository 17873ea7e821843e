"""Synthetic feature trajectories with controllable nuisance factors.

Reference frames are rectified, temporally smoothed random activations:
consecutive frames blend the previous state with a fresh draw (factor
0.7), giving adjacent-frame cosine distances around 0.2 while distant
frames stay well separated. The query traverse revisits the reference
route at a configurable speed, sees every place with its local features
shifted horizontally (new content entering on one side), and carries
multiplicative appearance noise. Optional aliasing pairs overwrite
reference frames with near-copies of distant ones to create false-match
pressure. A ground-truth table maps every query frame to the reference
frame it depicts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ConfigError, Trajectory

SMOOTHING_BLEND = 0.7
ALIASING_NOISE = 0.02


@dataclass(frozen=True)
class SynthSpec:
    """Generation parameters; all randomness derives from ``seed``."""

    n_frames: int
    width: int = 7
    dim: int = 64
    shift: int = 0
    noise: float = 0.0
    speed_ratio: float = 1.0
    aliasing_pairs: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n_frames < 1:
            raise ConfigError(f"n_frames must be >= 1, got {self.n_frames}")
        if self.width < 1 or self.dim < 1:
            raise ConfigError(f"invalid layout ({self.width}, {self.dim})")
        if not 0 <= self.shift < self.width:
            raise ConfigError(
                f"shift must be in [0, {self.width - 1}], got {self.shift}"
            )
        if self.noise < 0:
            raise ConfigError(f"noise must be >= 0, got {self.noise}")
        if self.speed_ratio <= 0:
            raise ConfigError(f"speed_ratio must be > 0, got {self.speed_ratio}")
        if self.aliasing_pairs < 0:
            raise ConfigError(f"aliasing_pairs must be >= 0, got {self.aliasing_pairs}")

    @property
    def query_frames(self) -> int:
        """Number of query frames whose mapped reference index stays in range."""
        return int((self.n_frames - 1) / self.speed_ratio) + 1


def _smoothed_activations(rng: np.random.Generator, n: int, width: int, dim: int) -> np.ndarray:
    """Rectified activations with exponential frame-to-frame blending.

    The blended state is rescaled to unit marginal variance before
    rectification so early frames are statistically identical to late
    ones.
    """
    draws = rng.standard_normal((n, width, dim))
    state = np.empty_like(draws)
    state[0] = draws[0]
    var = 1.0
    scales = np.empty(n)
    scales[0] = 1.0
    for t in range(1, n):
        state[t] = SMOOTHING_BLEND * state[t - 1] + (1.0 - SMOOTHING_BLEND) * draws[t]
        var = SMOOTHING_BLEND**2 * var + (1.0 - SMOOTHING_BLEND) ** 2
        scales[t] = np.sqrt(var)
    return np.maximum(0.0, state / scales[:, None, None])


def ground_truth_mapping(spec: SynthSpec) -> np.ndarray:
    """Reference index for each query frame: round(t * speed_ratio)."""
    t = np.arange(spec.query_frames)
    mapped = np.floor(t * spec.speed_ratio + 0.5).astype(np.int64)
    return np.minimum(mapped, spec.n_frames - 1)


def generate(spec: SynthSpec):
    """Build (reference, query, ground_truth) for ``spec``.

    The query's ground truth is also attached to the query trajectory.
    """
    rng = np.random.default_rng(spec.seed)
    reference = _smoothed_activations(rng, spec.n_frames, spec.width, spec.dim)

    if spec.aliasing_pairs and spec.n_frames >= 2:
        separation = max(spec.n_frames // 3, 1)
        src = rng.integers(0, spec.n_frames - separation, size=spec.aliasing_pairs)
        dst = rng.integers(src + separation, spec.n_frames)
        wobble = 1.0 + ALIASING_NOISE * rng.standard_normal(
            (spec.aliasing_pairs, spec.width, spec.dim)
        )
        reference[dst] = np.maximum(0.0, reference[src] * wobble)

    truth = ground_truth_mapping(spec)
    base = reference[truth]  # (n_q, W, D)

    query = np.empty_like(base)
    keep = spec.width - spec.shift
    query[:, :keep, :] = base[:, spec.shift :, :]
    if spec.shift:
        fill = _smoothed_activations(rng, len(truth), spec.width, spec.dim)
        query[:, keep:, :] = fill[:, : spec.shift, :]
    if spec.noise > 0:
        query = query * (1.0 + spec.noise * rng.standard_normal(query.shape))
        query = np.maximum(0.0, query)

    return Trajectory(reference), Trajectory(query, truth=truth), truth
