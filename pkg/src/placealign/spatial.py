"""Image-to-image distance by warping local feature sequences.

The distance between two images is obtained by aligning their W local
features with a dynamic program over the pairwise cosine-distance matrix.
Diagonal steps carry a weight ``a >= 1`` that grows with the estimated
horizontal viewpoint shift between the images, which penalizes the lazy
straight-diagonal alignment exactly when the views are shifted. The
accumulated distance is normalized by the total cost of the committed
path so that images of different overlap remain comparable.

Degenerate strategies live behind the same ``align`` entry point:
unweighted warping ("vanilla"), plain cosine over the concatenated
features ("holistic-cosine") and a fixed-size sliding window
("sliding-window").
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    AlignConfig,
    AlignmentResult,
    ConfigError,
    FeatureSequence,
    ShapeMismatchError,
    Trajectory,
    WarpingPath,
    point_distance,
)

# transition codes stored in the backtrace table
_START, _DIAG, _VERT, _HORIZ = 0, 1, 2, 3


@dataclass(frozen=True)
class AdaptiveWeight:
    """Diagonal-step weight derived from the estimated viewpoint shift.

    ``best_index`` is the reference position most similar to the query's
    central local feature; the weight grows with its offset from the
    center: ``a = sqrt(1 + sigma * |best_index - center|)``.
    """

    a: float
    best_index: int


def center_index(width: int) -> int:
    """0-based index of the central local feature."""
    return (width + 1) // 2 - 1


def band_mask(width: int, xi: int) -> np.ndarray:
    """Boolean W x W mask of cells within the ``|i - j| < xi`` band."""
    idx = np.arange(width)
    return np.abs(idx[:, None] - idx[None, :]) < xi


def _safe_unit_rows(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rows scaled to unit norm; zero rows stay zero. Returns (unit, zero_mask)."""
    norms = np.linalg.norm(mat, axis=-1)
    zero = norms == 0.0
    scale = np.where(zero, 1.0, norms)
    return mat / scale[..., None], zero


def pairwise_feature_distances(xf: np.ndarray, yf: np.ndarray) -> np.ndarray:
    """Cosine-distance matrix between two stacks of feature vectors.

    ``xf`` is (A, D), ``yf`` is (B, D); the result is (A, B). Zero rows
    follow the point-metric convention (0 against another zero row,
    1 against anything else).
    """
    xu, xz = _safe_unit_rows(np.asarray(xf, dtype=np.float64))
    yu, yz = _safe_unit_rows(np.asarray(yf, dtype=np.float64))
    d = 1.0 - xu @ yu.T
    if xz.any() or yz.any():
        d[np.ix_(xz, yz)] = 0.0
    return np.clip(d, 0.0, 2.0)


def build_distance_matrix(
    X: FeatureSequence,
    Y: FeatureSequence,
    restricted: bool = False,
    xi: int = 3,
) -> np.ndarray:
    """W x W local-feature distance matrix between two images.

    With ``restricted`` set, cells with ``|i - j| >= xi`` are never
    compared and hold ``np.inf``.
    """
    if X.features.shape != Y.features.shape:
        raise ShapeMismatchError(
            f"feature shapes differ: {X.features.shape} vs {Y.features.shape}"
        )
    d = pairwise_feature_distances(X.features, Y.features)
    if restricted:
        d[~band_mask(X.width, xi)] = np.inf
    return d


def adaptive_weight(distances: np.ndarray, sigma: float) -> AdaptiveWeight:
    """Diagonal weight for one image pair from its distance matrix.

    Scans the central row for the most similar reference position
    (smallest index on ties, banded cells excluded) and converts the
    offset from the center into the weight.
    """
    width = distances.shape[0]
    c = center_index(width)
    row = distances[c]
    finite = np.isfinite(row)
    if not finite.any():
        raise ConfigError("central row has no finite cells; band too narrow")
    best = int(np.argmin(np.where(finite, row, np.inf)))
    a = math.sqrt(1.0 + sigma * abs(best - c))
    return AdaptiveWeight(a=a, best_index=best)


def _dp_tables(d: np.ndarray, a: float):
    """Fill the cumulative-distance DP over one distance matrix.

    Returns (cumulative, total_cost, transitions, entry_costs). Interior
    cells take the cheapest of the weighted diagonal, vertical and
    horizontal candidates, evaluated in that order so ties resolve
    deterministically toward the diagonal. The weight is charged to the
    path cost only when the diagonal candidate strictly beats both
    alternatives; edge cells and tie-broken diagonals cost 1.
    """
    rows, cols = d.shape
    s = np.empty((rows, cols))
    c = np.empty((rows, cols))
    trans = np.zeros((rows, cols), dtype=np.int8)
    entry = np.ones((rows, cols))

    s[0, 0] = d[0, 0]
    c[0, 0] = 1.0
    for j in range(1, cols):
        s[0, j] = d[0, j] + s[0, j - 1]
        c[0, j] = c[0, j - 1] + 1.0
        trans[0, j] = _HORIZ
    for i in range(1, rows):
        s[i, 0] = d[i, 0] + s[i - 1, 0]
        c[i, 0] = c[i - 1, 0] + 1.0
        trans[i, 0] = _VERT
        for j in range(1, cols):
            dij = d[i, j]
            diag = a * dij + s[i - 1, j - 1]
            vert = dij + s[i - 1, j]
            horiz = dij + s[i, j - 1]
            if diag <= vert and diag <= horiz:
                cost = a if (diag < vert and diag < horiz) else 1.0
                s[i, j] = diag
                c[i, j] = c[i - 1, j - 1] + cost
                trans[i, j] = _DIAG
                entry[i, j] = cost
            elif vert <= horiz:
                s[i, j] = vert
                c[i, j] = c[i - 1, j] + 1.0
                trans[i, j] = _VERT
            else:
                s[i, j] = horiz
                c[i, j] = c[i, j - 1] + 1.0
                trans[i, j] = _HORIZ
    return s, c, trans, entry


def _backtrace(trans: np.ndarray, end: tuple) -> list:
    """Recover the committed path ending at ``end`` from the transitions."""
    i, j = end
    points = [(i, j)]
    while (i, j) != (0, 0):
        t = trans[i, j]
        if t == _DIAG:
            i, j = i - 1, j - 1
        elif t == _VERT:
            i -= 1
        elif t == _HORIZ:
            j -= 1
        else:
            raise AssertionError(f"start transition reached at ({i}, {j})")
        points.append((i, j))
    points.reverse()
    return points


def align_matrix(d: np.ndarray, a: float, weight=None) -> AlignmentResult:
    """Warp alignment over an explicit distance matrix with a fixed weight."""
    s, c, trans, entry = _dp_tables(np.asarray(d, dtype=np.float64), a)
    points = _backtrace(trans, (d.shape[0] - 1, d.shape[1] - 1))
    costs = np.array([entry[p] for p in points])
    path = WarpingPath(tuple(points), costs)
    cumulative = float(s[-1, -1])
    total = float(c[-1, -1])
    return AlignmentResult(
        distance=cumulative / total,
        path=path,
        cumulative=cumulative,
        total_cost=total,
        weight=weight,
    )


def _sliding_window_distance(d: np.ndarray, window_size: int) -> float:
    """Best mean distance over horizontal offsets keeping >= window_size overlap."""
    width = d.shape[0]
    if window_size > width:
        raise ConfigError(
            f"window_size {window_size} exceeds sequence width {width}"
        )
    max_off = width - window_size
    best = math.inf
    for off in range(-max_off, max_off + 1):
        i = np.arange(max(0, -off), min(width, width - off))
        score = float(d[i, i + off].mean())
        if score < best:
            best = score
    return best


def align(X: FeatureSequence, Y: FeatureSequence, cfg: AlignConfig) -> AlignmentResult:
    """Distance between two images under the configured spatial strategy.

    Warping modes return the normalized cumulative distance together with
    the committed path. "holistic-cosine" compares the concatenated
    features as a single vector (a 1x1 alignment). "sliding-window"
    reports only a distance (no path) and ignores the band and weight
    parameters, which do not apply to it.
    """
    if X.features.shape != Y.features.shape:
        raise ShapeMismatchError(
            f"feature shapes differ: {X.features.shape} vs {Y.features.shape}"
        )
    if cfg.mode == "holistic-cosine":
        d = point_distance(X.flattened(), Y.flattened())
        path = WarpingPath(((0, 0),), np.ones(1))
        return AlignmentResult(d, path, cumulative=d, total_cost=1.0)
    if cfg.mode == "sliding-window":
        d = pairwise_feature_distances(X.features, Y.features)
        dist = _sliding_window_distance(d, cfg.window_size)
        return AlignmentResult(dist, None, cumulative=dist, total_cost=1.0)

    d = build_distance_matrix(X, Y, cfg.restricted, cfg.xi)
    if cfg.mode == "adaptive":
        w = adaptive_weight(d, cfg.sigma)
        return align_matrix(d, w.a, w)
    return align_matrix(d, 1.0, None)


# ---------------------------------------------------------------------------
# batched image-distance grids
#
# Retrieval needs the distance from every query image to every history
# image. The cells are independent, so the grid is computed as a batch:
# one gram matrix per local-position pair, then the warping DP advanced
# in lockstep across all image pairs.
# ---------------------------------------------------------------------------


def _batched_weights(cells: np.ndarray, sigma: float) -> np.ndarray:
    """Vector of diagonal weights, one per image pair in the batch."""
    width = cells.shape[-1]
    c = center_index(width)
    best = np.argmin(cells[:, c, :], axis=-1)
    return np.sqrt(1.0 + sigma * np.abs(best - c))


def _batched_dp_distance(
    cells: np.ndarray, a: np.ndarray, in_band: np.ndarray | None = None
) -> np.ndarray:
    """Normalized warp distance for a batch of distance matrices.

    ``cells`` is (P, W, W); ``a`` is the per-pair diagonal weight (P,).
    Mirrors the scalar DP exactly, including tie handling. Cells outside
    ``in_band`` are never updated; they hold +inf and no optimal path can
    touch them, so skipping them is the band's computational saving.
    """
    p, rows, cols = cells.shape
    s = np.full((p, rows, cols), np.inf)
    c = np.full((p, rows, cols), np.inf)
    s[:, 0, 0] = cells[:, 0, 0]
    c[:, 0, 0] = 1.0
    for j in range(1, cols):
        if in_band is not None and not in_band[0, j]:
            break
        s[:, 0, j] = cells[:, 0, j] + s[:, 0, j - 1]
        c[:, 0, j] = c[:, 0, j - 1] + 1.0
    for i in range(1, rows):
        if in_band is None or in_band[i, 0]:
            s[:, i, 0] = cells[:, i, 0] + s[:, i - 1, 0]
            c[:, i, 0] = c[:, i - 1, 0] + 1.0
        for j in range(1, cols):
            if in_band is not None and not in_band[i, j]:
                continue
            dij = cells[:, i, j]
            diag = a * dij + s[:, i - 1, j - 1]
            vert = dij + s[:, i - 1, j]
            horiz = dij + s[:, i, j - 1]
            other = np.minimum(vert, horiz)
            take_diag = diag <= other
            strict = diag < other
            s[:, i, j] = np.where(take_diag, diag, other)
            prev = np.where(
                take_diag,
                c[:, i - 1, j - 1],
                np.where(vert <= horiz, c[:, i - 1, j], c[:, i, j - 1]),
            )
            c[:, i, j] = prev + np.where(strict, a, 1.0)
    return s[:, -1, -1] / c[:, -1, -1]


def _iter_frame_chunks(n: int, chunk: int):
    for lo in range(0, n, chunk):
        yield lo, min(lo + chunk, n)


def _cell_grid(
    query: Trajectory,
    reference: Trajectory,
    in_band: np.ndarray | None,
    chunk_frames: int,
) -> np.ndarray:
    """Local-feature distance grid of shape (nq, nr, W, W).

    Unbanded grids pack all positions of a reference chunk into a single
    gram product; banded grids compute one product per in-band position
    pair and leave the rest at +inf.
    """
    nq, nr, width = len(query), len(reference), query.width
    qu, qz = _safe_unit_rows(query.frames)  # (nq, W, D)
    if in_band is None:
        cells = np.empty((nq, nr, width, width))
        quf = qu.reshape(nq * width, -1)
        for lo, hi in _iter_frame_chunks(nr, chunk_frames):
            ru, rz = _safe_unit_rows(reference.frames[lo:hi])
            gram = quf @ ru.reshape((hi - lo) * width, -1).T
            block = 1.0 - gram.reshape(nq, width, hi - lo, width).transpose(0, 2, 1, 3)
            if qz.any() or rz.any():
                both = qz[:, None, :, None] & rz[None, :, None, :]
                block[both] = 0.0
            cells[:, lo:hi] = np.clip(block, 0.0, 2.0)
        return cells

    cells = np.full((nq, nr, width, width), np.inf)
    pairs = [(i, j) for i in range(width) for j in range(width) if in_band[i, j]]
    for lo, hi in _iter_frame_chunks(nr, chunk_frames):
        ru, rz = _safe_unit_rows(reference.frames[lo:hi])
        for i, j in pairs:
            block = 1.0 - qu[:, i, :] @ ru[:, j, :].T
            fix_q, fix_r = qz[:, i], rz[:, j]
            if fix_q.any() or fix_r.any():
                block[np.ix_(fix_q, fix_r)] = 0.0
            cells[:, lo:hi, i, j] = np.clip(block, 0.0, 2.0)
    return cells


def pairwise_image_distances(
    query: Trajectory,
    reference: Trajectory,
    cfg: AlignConfig,
    chunk_frames: int = 256,
) -> np.ndarray:
    """Image-distance grid between two trajectories, shape (len(query), len(reference)).

    Equivalent to calling ``align`` on every frame pair; computed batched.
    Reference frames are processed in chunks to bound peak memory at high
    feature dimensions.
    """
    if (query.width, query.dim) != (reference.width, reference.dim):
        raise ShapeMismatchError(
            f"trajectory layouts differ: {(query.width, query.dim)} vs "
            f"{(reference.width, reference.dim)}"
        )
    nq, nr, width = len(query), len(reference), query.width

    if cfg.mode == "holistic-cosine":
        qflat = query.frames.reshape(nq, -1)
        qu, qz = _safe_unit_rows(qflat)
        out = np.empty((nq, nr))
        for lo, hi in _iter_frame_chunks(nr, chunk_frames):
            ru, rz = _safe_unit_rows(reference.frames[lo:hi].reshape(hi - lo, -1))
            block = 1.0 - qu @ ru.T
            if qz.any() or rz.any():
                block[np.ix_(qz, rz)] = 0.0
            out[:, lo:hi] = block
        return np.clip(out, 0.0, 2.0)

    restricted = cfg.restricted and cfg.mode in ("adaptive", "vanilla")
    in_band = band_mask(width, cfg.xi) if restricted else None
    if in_band is not None and in_band.all():
        in_band = None  # band covers the whole grid
    cells = _cell_grid(query, reference, in_band, chunk_frames)

    if cfg.mode == "sliding-window":
        if cfg.window_size > width:
            raise ConfigError(
                f"window_size {cfg.window_size} exceeds sequence width {width}"
            )
        max_off = width - cfg.window_size
        scores = []
        for off in range(-max_off, max_off + 1):
            i = np.arange(max(0, -off), min(width, width - off))
            scores.append(cells[:, :, i, i + off].mean(axis=-1))
        return np.min(np.stack(scores), axis=0)

    flat = cells.reshape(nq * nr, width, width)
    if cfg.mode == "adaptive":
        a = _batched_weights(flat, cfg.sigma)
    else:
        a = np.ones(nq * nr)
    return _batched_dp_distance(flat, a, in_band).reshape(nq, nr)
