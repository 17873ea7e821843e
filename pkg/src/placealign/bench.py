"""Runtime benchmark: distance-grid construction vs. the retrieval pass.

Three feature variants are timed at each history length: the raw
high-dimensional features ("original"), randomly projected features
("grp") and projected features with the banded distance matrix
("grp-ra"). Grid construction and retrieval are timed separately because
the grid dominates total cost and is exactly what projection and banding
accelerate; projection itself is a one-off preprocessing step reported
on its own. The retrieval DP touches a fixed l x k grid per history
frame, so its cell-update count is n * l * k exactly and is reported
alongside the wall times.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .model import AlignConfig
from .projection import ProjectionSpec, project_trajectory
from .spatial import pairwise_image_distances
from .synthesis import SynthSpec, generate
from .temporal import RetrievalConfig, search_distance_matrix

VARIANTS = ("original", "grp", "grp-ra")


@dataclass(frozen=True)
class BenchRow:
    """Timing record for one (history length, variant) combination."""

    n: int
    variant: str
    dch_seconds: float
    retrieval_seconds: float
    dp_cell_updates: int
    dch_cells: int
    prep_seconds: float
    repetitions: int
    dch_seconds_all: tuple
    retrieval_seconds_all: tuple


def _median(values) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def run_benchmark(
    n_values,
    seq_len: int = 20,
    beta: float = 2.0,
    repetitions: int = 3,
    dim: int = 10416,
    width: int = 7,
    target_dim: int = 512,
    xi: int = 3,
    sigma: float = 1.0,
    seed: int = 0,
    variants=VARIANTS,
) -> list:
    """Time D_CH construction and retrieval for every (n, variant) pair."""
    rcfg = RetrievalConfig(seq_len=seq_len, beta=beta)
    rows = []
    for n in n_values:
        spec = SynthSpec(n_frames=n, width=width, dim=dim, seed=seed)
        reference, query_full, _ = generate(spec)
        query = query_full.window(0, seq_len)
        for variant in variants:
            if variant not in VARIANTS:
                raise ValueError(f"unknown variant {variant!r}")
            t0 = time.perf_counter()
            if variant == "original":
                q, r = query, reference
                cfg = AlignConfig(sigma=sigma, xi=xi, restricted=False)
            else:
                pspec = ProjectionSpec(source_dim=dim, target_dim=target_dim, seed=seed)
                q = project_trajectory(query, pspec)
                r = project_trajectory(reference, pspec)
                cfg = AlignConfig(sigma=sigma, xi=xi, restricted=(variant == "grp-ra"))
            prep = time.perf_counter() - t0

            dch_times, retr_times = [], []
            stats = None
            for rep in range(repetitions + 1):
                t0 = time.perf_counter()
                dch = pairwise_image_distances(q, r, cfg)
                t1 = time.perf_counter()
                matches, run_stats = search_distance_matrix(dch, rcfg.window_len)
                t2 = time.perf_counter()
                assert len(matches) == n
                if stats is not None and stats != run_stats:
                    raise AssertionError("retrieval work varied between repetitions")
                stats = run_stats
                if rep == 0:
                    continue  # warmup: first pass pays allocator and cache setup
                dch_times.append(t1 - t0)
                retr_times.append(t2 - t1)
            rows.append(
                BenchRow(
                    n=n,
                    variant=variant,
                    dch_seconds=_median(dch_times),
                    retrieval_seconds=_median(retr_times),
                    dp_cell_updates=stats.dp_cell_updates,
                    dch_cells=seq_len * n,
                    prep_seconds=prep,
                    repetitions=repetitions,
                    dch_seconds_all=tuple(dch_times),
                    retrieval_seconds_all=tuple(retr_times),
                )
            )
    return rows


def format_table(rows) -> str:
    header = "n\tvariant\tdch_s\tretrieval_s\tdp_cell_updates\tdch_cells\tprep_s"
    lines = [header]
    for r in rows:
        lines.append(
            f"{r.n}\t{r.variant}\t{r.dch_seconds:.6f}\t{r.retrieval_seconds:.6f}"
            f"\t{r.dp_cell_updates}\t{r.dch_cells}\t{r.prep_seconds:.6f}"
        )
    return "\n".join(lines)
