"""Subsequence retrieval: locate a query sequence inside a history.

For a query C of l frames and a history H of n frames, every history
frame is considered as a candidate start. The candidate window spans at
most ``k = ceil(beta * l)`` frames; a warping DP with relaxed endpoint is
run over the window's image-distance matrix, and the window prefix length
``m`` minimizing the normalized cumulative distance is the recovered
match length. All window DPs advance in lockstep over a padded (l, k, n)
tensor, so total retrieval work is exactly n * l * k cell updates; padded
cells hold +inf and can never win, which makes a padded window behave
identically to a truncated one.

The image-distance grid D_CH is computed once; windows are slices of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AlignConfig, ConfigError, Trajectory, WarpingPath
from .spatial import pairwise_image_distances

_START, _DIAG, _VERT, _HORIZ = 0, 1, 2, 3


@dataclass(frozen=True)
class RetrievalConfig:
    """Sequence-matching parameters.

    ``seq_len`` is the query length l; ``beta`` bounds the speed ratio
    between the two traverses, giving the window length ``k = ceil(beta*l)``.
    A true match longer than ``beta * l`` frames is not rejected, but it
    can only be found at a worse distance. ``threshold`` is the
    acceptance cut on sequence distance (swept during evaluation).
    """

    seq_len: int = 20
    beta: float = 2.0
    threshold: float | None = None

    def __post_init__(self):
        if self.seq_len < 2:
            raise ConfigError(f"seq_len must be >= 2, got {self.seq_len}")
        if self.beta <= 1:
            raise ConfigError(f"beta must be > 1, got {self.beta}")

    @property
    def window_len(self) -> int:
        return math.ceil(self.beta * self.seq_len)


@dataclass(frozen=True)
class SequenceMatch:
    """One candidate window's best subsequence alignment.

    ``start`` is the history frame opening the window, ``length`` the
    recovered subsequence length m, ``distance`` the normalized sequence
    distance, and ``frame_pairs`` the (query frame, history frame) pairs
    along the warping path.
    """

    start: int
    length: int
    distance: float
    path: WarpingPath
    frame_pairs: tuple

    def history_span(self) -> tuple:
        return (self.start, self.start + self.length - 1)


@dataclass(frozen=True)
class RetrievalStats:
    """Work accounting for one search call."""

    windows: int
    dp_cell_updates: int


def _relaxed_dp(cells: np.ndarray):
    """Unweighted warping DP over (l, k, n)-batched window matrices.

    Returns (cumulative, path_len, transitions); the vector axis is the
    window. All path costs are 1, so the normalizer equals the number of
    path points. Cells are advanced one anti-diagonal at a time so each
    numpy dispatch covers a full (diagonal, window) slab and the wall
    time stays proportional to the cell count.
    """
    l, k, n = cells.shape
    s = np.empty((l, k, n))
    plen = np.empty((l, k, n), dtype=np.int32)
    trans = np.empty((l, k, n), dtype=np.int8)

    s[0, 0] = cells[0, 0]
    plen[0, 0] = 1
    trans[0, 0] = _START
    for d in range(1, l + k - 1):
        if d < k:  # first-row cell (0, d)
            s[0, d] = cells[0, d] + s[0, d - 1]
            plen[0, d] = plen[0, d - 1] + 1
            trans[0, d] = _HORIZ
        if d < l:  # first-column cell (d, 0)
            s[d, 0] = cells[d, 0] + s[d - 1, 0]
            plen[d, 0] = plen[d - 1, 0] + 1
            trans[d, 0] = _VERT
        lo = max(1, d - k + 1)
        hi = min(l - 1, d - 1)
        if lo > hi:
            continue
        ii = np.arange(lo, hi + 1)
        xx = d - ii
        w = cells[ii, xx]
        diag = w + s[ii - 1, xx - 1]
        vert = w + s[ii - 1, xx]
        horiz = w + s[ii, xx - 1]
        other = np.minimum(vert, horiz)
        take_diag = diag <= other
        s[ii, xx] = np.where(take_diag, diag, other)
        take_vert = ~take_diag & (vert <= horiz)
        plen[ii, xx] = (
            np.where(
                take_diag,
                plen[ii - 1, xx - 1],
                np.where(take_vert, plen[ii - 1, xx], plen[ii, xx - 1]),
            )
            + 1
        )
        trans[ii, xx] = np.where(take_diag, _DIAG, np.where(take_vert, _VERT, _HORIZ))
    return s, plen, trans


def _trace_window(trans: np.ndarray, end_col: int) -> list:
    """Path points for one window from its transition table slice (l, k)."""
    i, x = trans.shape[0] - 1, end_col
    points = [(i, x)]
    while (i, x) != (0, 0):
        t = trans[i, x]
        if t == _DIAG:
            i, x = i - 1, x - 1
        elif t == _VERT:
            i -= 1
        elif t == _HORIZ:
            x -= 1
        else:
            raise AssertionError(f"start transition reached at ({i}, {x})")
        points.append((i, x))
    points.reverse()
    return points


def _window_tensor_block(dch: np.ndarray, k: int, lo: int, hi: int) -> np.ndarray:
    """Window slices of D_CH for starts [lo, hi), padded with +inf past the end."""
    n = dch.shape[1]
    cols = np.arange(lo, hi)[None, :] + np.arange(k)[:, None]  # (k, hi-lo)
    padded = cols >= n
    window = dch[:, np.minimum(cols, n - 1)]  # (l, k, hi-lo)
    window[:, padded] = np.inf
    return window


def match_window(dch_window: np.ndarray) -> tuple:
    """Best subsequence alignment inside a single candidate window.

    ``dch_window`` is the (l, k') image-distance matrix between the query
    and the window frames. Returns (length m, distance, WarpingPath); the
    path ends at row l-1, column m-1. Ties on the normalized distance go
    to the shortest length.
    """
    l, kp = dch_window.shape
    if l < 2:
        raise ConfigError(f"query must have at least 2 frames, got {l}")
    if kp < 1:
        raise ConfigError("candidate window is empty")
    s, plen, trans = _relaxed_dp(dch_window[:, :, None])
    normalized = s[l - 1, :, 0] / plen[l - 1, :, 0]
    m = int(np.argmin(normalized)) + 1
    points = _trace_window(trans[:, :, 0], m - 1)
    assert len(points) == int(plen[l - 1, m - 1, 0]), "normalizer != path length"
    path = WarpingPath(tuple(points), np.ones(len(points)))
    return m, float(normalized[m - 1]), path


def locate_subsequence(
    query: Trajectory, candidate: Trajectory, image_cfg: AlignConfig
) -> tuple:
    """Locate the best-matching prefix of ``candidate`` for the whole query.

    Computes the image-distance matrix between the two trajectories and
    delegates to :func:`match_window`. Returns (m, distance, path).
    """
    if len(query) < 2:
        raise ConfigError(f"query must have at least 2 frames, got {len(query)}")
    if len(candidate) < 1:
        raise ConfigError("candidate window is empty")
    dch = pairwise_image_distances(query, candidate, image_cfg)
    return match_window(dch)


_SCAN_BLOCK = 512  # windows per DP slab; keeps the working set cache-resident


def search_distance_matrix(
    dch: np.ndarray,
    k: int,
    top_k: int | None = None,
) -> tuple:
    """Rank every history start by its window's subsequence distance.

    ``dch`` is the full (l, n) image-distance grid. Returns
    (matches, stats) with matches sorted by (distance, start); ``top_k``
    bounds how many ranked matches are materialized with paths. Windows
    are scanned in fixed-size blocks, so memory and wall time both grow
    linearly with the history length.
    """
    l, n = dch.shape
    if l < 2:
        raise ConfigError(f"query must have at least 2 frames, got {l}")
    if n < 1:
        raise ConfigError("history is empty")
    if k < 1:
        raise ConfigError(f"window length must be >= 1, got {k}")
    k = min(k, n)

    trans = np.empty((l, k, n), dtype=np.int8)
    last_norm = np.empty((k, n))
    last_plen = np.empty((k, n), dtype=np.int32)
    for lo in range(0, n, _SCAN_BLOCK):
        hi = min(lo + _SCAN_BLOCK, n)
        window = _window_tensor_block(dch, k, lo, hi)
        s, plen, tr = _relaxed_dp(window)
        trans[:, :, lo:hi] = tr
        last_norm[:, lo:hi] = s[l - 1] / plen[l - 1]
        last_plen[:, lo:hi] = plen[l - 1]

    m_idx = np.argmin(last_norm, axis=0)  # smallest x on ties
    dists = last_norm[m_idx, np.arange(n)]

    order = np.lexsort((np.arange(n), dists))
    if top_k is not None:
        order = order[:top_k]
    matches = []
    for start in order:
        end_col = int(m_idx[start])
        points = _trace_window(trans[:, :, start], end_col)
        assert len(points) == int(last_plen[end_col, start]), (
            "normalizer != path length"
        )
        path = WarpingPath(tuple(points), np.ones(len(points)))
        pairs = tuple((i, start + x) for i, x in points)
        matches.append(
            SequenceMatch(
                start=int(start),
                length=end_col + 1,
                distance=float(dists[start]),
                path=path,
                frame_pairs=pairs,
            )
        )
    stats = RetrievalStats(windows=n, dp_cell_updates=l * k * n)
    return matches, stats


def search(
    query: Trajectory,
    history: Trajectory,
    rcfg: RetrievalConfig,
    image_cfg: AlignConfig,
    top_k: int | None = None,
) -> list:
    """Ranked subsequence matches for the query against the full history.

    The image-distance grid is computed once; every history frame opens a
    candidate window sliced from it. Returns all starts ranked ascending
    by distance unless ``top_k`` is given.
    """
    if len(query) != rcfg.seq_len:
        raise ConfigError(
            f"query has {len(query)} frames but config expects {rcfg.seq_len}"
        )
    dch = pairwise_image_distances(query, history, image_cfg)
    matches, _ = search_distance_matrix(dch, rcfg.window_len, top_k)
    return matches
