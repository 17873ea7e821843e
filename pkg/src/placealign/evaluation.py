"""Retrieval evaluation: tolerance-judged PR sweeps over the mode matrix.

A retrieval is judged per query frame. Sequence pipelines slide an
l-frame window over the query traverse; each window's best match predicts
the reference frame for the window's midpoint, and the frames before the
first and after the last midpoint are filled in by extrapolating along
the nearest window's warping path. Single-image pipelines predict the
nearest history frame for every query frame directly. A prediction is
positive when its distance falls below the threshold, and a positive
counts as correct when the predicted reference index is within the frame
tolerance of the ground truth. Thresholding happens post hoc on stored
distances, so one run yields the entire precision-recall curve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model import AlignConfig, ConfigError, Trajectory
from .spatial import pairwise_image_distances
from .temporal import RetrievalConfig, SequenceMatch, search_distance_matrix

log = logging.getLogger(__name__)

OUTCOMES = ("TP", "FP", "FN", "TN")


@dataclass(frozen=True)
class EvalProtocol:
    """Tolerance (frames) and the thresholds swept for the PR curve.

    An empty ``thresholds`` tuple derives the sweep from the observed
    distances (midpoints between consecutive distinct values, plus
    all-reject and all-accept endpoints).
    """

    tolerance: int = 3
    thresholds: tuple = ()

    def __post_init__(self):
        if self.tolerance < 0:
            raise ConfigError(f"tolerance must be >= 0, got {self.tolerance}")
        t = tuple(float(x) for x in self.thresholds)
        if list(t) != sorted(t):
            raise ConfigError("thresholds must be sorted ascending")
        object.__setattr__(self, "thresholds", t)


@dataclass(frozen=True)
class Prediction:
    """One query frame's retrieval outcome before judging."""

    query_index: int
    predicted_index: int
    distance: float
    compensated: bool = False


@dataclass(frozen=True)
class WindowMatch:
    """Rank-0 match of the query window starting at ``window_start``."""

    window_start: int
    match: SequenceMatch


def predicted_midpoint(match: SequenceMatch) -> int:
    """Midpoint frame of the matched history subsequence."""
    return match.start + (match.length - 1) // 2


def judge_prediction(
    distance: float,
    predicted_index: int,
    truth_index: int,
    tolerance: int,
    threshold: float,
) -> str:
    """Classify one prediction as TP/FP/FN/TN.

    ``truth_index`` of -1 means the query place does not exist in the
    history. A prediction is positive iff ``distance < threshold``.
    """
    positive = distance < threshold
    has_truth = truth_index >= 0
    if positive:
        if has_truth and abs(predicted_index - truth_index) <= tolerance:
            return "TP"
        return "FP"
    return "FN" if has_truth else "TN"


def judge(
    match: SequenceMatch, query_mid_truth: int, tolerance: int, threshold: float
) -> str:
    """Judge a sequence match against the query midpoint's ground truth."""
    return judge_prediction(
        match.distance, predicted_midpoint(match), query_mid_truth, tolerance, threshold
    )


@dataclass(frozen=True)
class ThresholdPoint:
    threshold: float
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float:
        # no predicted positives: degenerate point, precision 1 by convention
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if (p + r) else 0.0


@dataclass(frozen=True)
class PRCurve:
    points: tuple

    @property
    def best(self) -> ThresholdPoint:
        return max(self.points, key=lambda p: p.f1)

    @property
    def best_f1(self) -> float:
        return self.best.f1

    def to_table(self) -> str:
        lines = ["threshold\ttp\tfp\tfn\ttn\tprecision\trecall\tf1"]
        for p in self.points:
            lines.append(
                f"{p.threshold:.9g}\t{p.tp}\t{p.fp}\t{p.fn}\t{p.tn}"
                f"\t{p.precision:.6f}\t{p.recall:.6f}\t{p.f1:.6f}"
            )
        return "\n".join(lines)


def default_thresholds(distances) -> tuple:
    """Sweep grid resolving every distinct accept/reject split of the distances."""
    d = np.unique(np.asarray(distances, dtype=np.float64))
    if d.size == 0:
        return (0.0, 1.0)
    cuts = [0.0]
    cuts.extend(((d[:-1] + d[1:]) / 2.0).tolist())
    cuts.append(float(d[-1]) + 1e-9)
    return tuple(cuts)


def f1_sweep(predictions, truths, protocol: EvalProtocol) -> PRCurve:
    """Judge every prediction at every threshold and trace the PR curve.

    ``truths`` maps query index to reference index (-1 for "no true
    match"); queries whose index is outside the table are excluded from
    the counts and logged.
    """
    usable = []
    for pred in predictions:
        if 0 <= pred.query_index < len(truths):
            usable.append((pred, int(truths[pred.query_index])))
        else:
            log.warning("query %d has no ground truth; excluded", pred.query_index)
    thresholds = protocol.thresholds or default_thresholds(
        [p.distance for p, _ in usable]
    )
    points = []
    for th in thresholds:
        counts = dict.fromkeys(OUTCOMES, 0)
        for pred, truth in usable:
            outcome = judge_prediction(
                pred.distance, pred.predicted_index, truth, protocol.tolerance, th
            )
            counts[outcome] += 1
        points.append(ThresholdPoint(th, counts["TP"], counts["FP"], counts["FN"], counts["TN"]))
    return PRCurve(tuple(points))


def _aligned_history_frame(wm: WindowMatch, query_index: int) -> int:
    """History frame the window's path pairs with the given query frame."""
    row = query_index - wm.window_start
    for i, h in wm.match.frame_pairs:
        if i == row:
            return h
    raise AssertionError(f"path covers no row {row}")


def compensate_boundaries(
    predictions, window_matches, seq_len: int, n_query: int
):
    """Fill in the query frames before the first and after the last midpoint.

    Interior predictions pass through unchanged. Each uncovered head or
    tail frame takes the history frame its nearest window's warping path
    aligns it with, at that window's distance. Returns the completed
    list sorted by query index; skips with a warning when there are no
    windows to extrapolate from.
    """
    out = list(predictions)
    if not window_matches:
        log.warning(
            "no full windows (query shorter than %d frames); compensation skipped",
            seq_len,
        )
        return out
    covered = {p.query_index for p in out}
    first, last = window_matches[0], window_matches[-1]
    mid_off = (seq_len - 1) // 2
    for q in range(first.window_start, first.window_start + mid_off):
        if q not in covered:
            out.append(
                Prediction(q, _aligned_history_frame(first, q), first.match.distance, True)
            )
    for q in range(last.window_start + mid_off + 1, n_query):
        if q not in covered:
            out.append(
                Prediction(q, _aligned_history_frame(last, q), last.match.distance, True)
            )
    out.sort(key=lambda p: p.query_index)
    return out


def run_pipeline(
    query: Trajectory,
    history: Trajectory,
    image_cfg: AlignConfig,
    rcfg: RetrievalConfig | None = None,
    temporal: bool = True,
) -> list:
    """Per-frame predictions under one (image mode, temporal mode) cell.

    Sequence and single-image pipelines share the image-distance grid;
    the sequence pipeline runs the ranked-window search on every query
    window and keeps each window's rank-0 match, while the single-image
    pipeline reads the per-frame nearest history frame off the grid.
    """
    dch = pairwise_image_distances(query, history, image_cfg)
    if not temporal:
        nearest = np.argmin(dch, axis=1)
        return [
            Prediction(q, int(nearest[q]), float(dch[q, nearest[q]]))
            for q in range(len(query))
        ]
    if rcfg is None:
        rcfg = RetrievalConfig()
    l = rcfg.seq_len
    window_matches = []
    for w in range(0, len(query) - l + 1):
        ranked, _ = search_distance_matrix(dch[w : w + l], rcfg.window_len, top_k=1)
        window_matches.append(WindowMatch(w, ranked[0]))
    mid_off = (l - 1) // 2
    predictions = [
        Prediction(
            wm.window_start + mid_off,
            predicted_midpoint(wm.match),
            wm.match.distance,
        )
        for wm in window_matches
    ]
    return compensate_boundaries(predictions, window_matches, l, len(query))


def evaluate(
    query: Trajectory,
    history: Trajectory,
    image_cfg: AlignConfig,
    protocol: EvalProtocol,
    rcfg: RetrievalConfig | None = None,
    temporal: bool = True,
) -> tuple:
    """Run one pipeline cell and sweep it; returns (predictions, PRCurve)."""
    if query.truth is None:
        raise ConfigError("query trajectory carries no ground truth")
    predictions = run_pipeline(query, history, image_cfg, rcfg, temporal)
    return predictions, f1_sweep(predictions, query.truth, protocol)
