"""Independent reference implementations used to cross-check the engine.

Everything here deliberately avoids the production code paths: warping
scores come from explicit path enumeration, scalar distances from
high-precision decimal arithmetic, and subsequence lengths from one
standalone plain-Python DP per candidate prefix.
"""

from decimal import Decimal, getcontext
from functools import lru_cache
import math


@lru_cache(maxsize=None)
def monotone_paths(rows, cols):
    """All paths from (0,0) to (rows-1, cols-1) using steps (1,0), (0,1), (1,1).

    Each path is a tuple of (i, j, entered_diagonally) triples.
    """

    def extend(i, j):
        if (i, j) == (rows - 1, cols - 1):
            return [[(i, j)]]
        out = []
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            ni, nj = i + di, j + dj
            if ni < rows and nj < cols:
                for tail in extend(ni, nj):
                    out.append([(i, j)] + tail)
        return out

    paths = []
    for raw in extend(0, 0):
        marked = [(0, 0, False)]
        for (pi, pj), (ci, cj) in zip(raw, raw[1:]):
            marked.append((ci, cj, ci - pi == 1 and cj - pj == 1))
        paths.append(tuple(marked))
    return tuple(paths)


def min_weighted_path_score(d, a):
    """Brute-force minimum path score; diagonal-entered points weighted by ``a``."""
    best = math.inf
    for path in monotone_paths(len(d), len(d[0])):
        score = 0.0
        for i, j, diag in path:
            score += a * d[i][j] if diag else d[i][j]
        if score < best:
            best = score
    return best


def decimal_cosine_distance(x, y, prec=60):
    """Cosine distance evaluated in high-precision decimal arithmetic."""
    getcontext().prec = prec
    xs = [Decimal(repr(float(v))) for v in x]
    ys = [Decimal(repr(float(v))) for v in y]
    dot = sum(a * b for a, b in zip(xs, ys))
    nx = sum(a * a for a in xs).sqrt()
    ny = sum(b * b for b in ys).sqrt()
    return float(Decimal(1) - dot / (nx * ny))


def plain_dtw(d):
    """Unweighted DTW over a full matrix: (cumulative, committed path length).

    Scalar Python DP with the tie order diagonal, vertical, horizontal.
    """
    rows, cols = len(d), len(d[0])
    s = [[0.0] * cols for _ in range(rows)]
    n = [[0] * cols for _ in range(rows)]
    s[0][0], n[0][0] = d[0][0], 1
    for j in range(1, cols):
        s[0][j] = d[0][j] + s[0][j - 1]
        n[0][j] = j + 1
    for i in range(1, rows):
        s[i][0] = d[i][0] + s[i - 1][0]
        n[i][0] = i + 1
        for j in range(1, cols):
            diag, vert, horiz = s[i - 1][j - 1], s[i - 1][j], s[i][j - 1]
            if diag <= vert and diag <= horiz:
                prev = n[i - 1][j - 1]
                best = diag
            elif vert <= horiz:
                prev = n[i - 1][j]
                best = vert
            else:
                prev = n[i][j - 1]
                best = horiz
            s[i][j] = d[i][j] + best
            n[i][j] = prev + 1
    return s[rows - 1][cols - 1], n[rows - 1][cols - 1]


def xscan_best_prefix(d):
    """Exhaustive prefix scan: one standalone DTW per candidate length.

    Returns (m, normalized distance) minimizing cumulative/path-length
    over prefixes d[:, :x]; smallest x wins ties.
    """
    cols = len(d[0])
    best_m, best = None, math.inf
    for x in range(1, cols + 1):
        prefix = [row[:x] for row in d]
        cum, length = plain_dtw(prefix)
        score = cum / length
        if score < best:
            best_m, best = x, score
    return best_m, best
